#pragma once

// Deterministic 10-class stroke-image generator for hermetic desk-scale
// tests: each class is a fixed arrangement of soft line segments, each sample
// a shifted, intensity-jittered, lightly noised rendering. Stands in for
// handwritten digits where the real dataset is not available.

#include <cstdint>

#include "recap/dataio.hpp"

namespace recap::testing {

struct SynthOptions {
  int per_class = 50;
  std::uint64_t seed = 7;            // per-sample jitter stream
  std::uint64_t archetype_seed = 42; // class stroke layouts; share across splits
  int classes = 10;
  int max_shift = 1;          // uniform integer translation in pixels
  double pixel_noise = 0.05;  // additive gaussian noise sigma
};

Dataset make_synth_dataset(const SynthOptions& options);

}  // namespace recap::testing

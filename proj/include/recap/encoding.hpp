#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "recap/bitmatrix.hpp"
#include "recap/reservoir.hpp"

namespace recap {

// Uniform scalar quantizer over [lo, hi] with K levels. Bins are half-open
// [b_k, b_{k+1}) with the top edge closed so hi maps to level K-1.
struct QuantizerSpec {
  int levels = 8;
  double lo = -1.0;
  double hi = 1.0;

  void validate() const;  // throws ConfigError
  double edge(int k) const noexcept {
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(levels);
  }
  bool operator==(const QuantizerSpec&) const = default;
};

// Per-unit discrete activation levels, each in {0..K-1}.
struct LevelCode {
  std::vector<std::uint16_t> levels;
  std::uint16_t n_levels = 0;
  std::optional<int> label;
};

// Symmetric zero-diagonal relation marking unit pairs that share a level.
// Carries both the packed bits and the level-bucket partition; every
// bucket-based computation must agree with the bitset definition.
struct CoactivationMask {
  SquareBitMatrix bits;
  std::vector<std::vector<std::uint32_t>> level_buckets;  // index = level
  std::optional<int> label;

  std::uint32_t n_units() const noexcept { return bits.size(); }
};

// Values are clamped to [lo, hi] first (float rounding can push averages a
// hair outside); non-finite entries are an error.
LevelCode quantize(const StateVector& state, const QuantizerSpec& quantizer);

CoactivationMask build_mask(const LevelCode& code);

// Frobenius inner product of two masks: word-wise AND + popcount over all
// ordered pairs. Shared kernel for prototype scoring.
std::uint64_t mask_overlap(const CoactivationMask& a, const CoactivationMask& b);

}  // namespace recap

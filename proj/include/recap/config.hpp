#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "recap/encoding.hpp"
#include "recap/prototype.hpp"
#include "recap/reservoir.hpp"
#include "recap/ridge.hpp"

namespace recap {

// Every hyperparameter the pipeline takes, with defaults matching the
// published RECAP/ESN-Ridge configuration. The digest covers the fields that
// affect results (everything except file paths) and is embedded in models
// and reports.
struct RunConfig {
  // reservoir
  int n_units = 1024;
  double spectral_radius = 1.0;
  double leak_rate = 0.5;
  double sparsity = 0.9;
  int steps = 60;
  int washout = 0;
  // encoding + plasticity
  int levels = 8;
  double potentiation = 0.6;
  double decay = 0.96;
  double sparsity_fraction = 0.3;
  int classes = kNumClasses;
  // ridge readout
  double ridge_beta = 1e-5;
  // run controls
  std::string kind = "recap";  // "recap" | "ridge"
  std::uint64_t seed = 1;
  int epochs = 1;
  int subset_per_class = 0;  // 0 = use the full set
  std::uint64_t subset_seed = 1;
  int threads = 0;  // 0 = RECAP_THREADS env or hardware concurrency
  bool keep_states = false;

  void validate() const;  // throws ConfigError
  std::uint64_t digest() const;

  ReservoirSpec reservoir_spec() const;
  QuantizerSpec quantizer_spec() const;
  HebbSpec hebb_spec() const;
  RidgeSpec ridge_spec() const;
};

// Key-value config file: one `key = value` per line, '#' comments. Unknown
// keys are an error; every key can also be set by the matching CLI flag.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace recap

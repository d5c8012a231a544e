#pragma once

#include <cstdint>
#include <string>

namespace recap {

inline constexpr std::uint16_t kModelFormatVersion = 1;

// Reproducibility metadata carried by every trained model. Weights are
// regenerated from the seed, so the seed plus generator id is the source of
// truth; digests pin the config and the training-set order.
struct ModelMeta {
  std::uint64_t seed = 0;
  std::string prng_id;
  std::uint16_t format_version = kModelFormatVersion;
  std::uint64_t config_digest = 0;
  std::uint64_t dataset_digest = 0;
};

}  // namespace recap

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "recap/image.hpp"

namespace recap {

// The 15 MNIST-C corruption types in the canonical reporting order. Eleven
// are synthesized natively; snow, frost, fog and jpeg_compression are
// external-only and enter through load_external.
enum class CorruptionKind : int {
  gaussian_noise,
  shot_noise,
  impulse_noise,
  defocus_blur,
  glass_blur,
  motion_blur,
  zoom_blur,
  snow,
  frost,
  fog,
  brightness,
  contrast,
  elastic_transform,
  pixelate,
  jpeg_compression,
};

inline constexpr int kNumCorruptionKinds = 15;
inline constexpr int kNumSeverities = 5;

// Version tag for the severity parameter tables below; embedded in every
// benchmark report since the parameter values are implementation-defined,
// not taken from any published table.
inline constexpr const char* kSeverityTableVersion = "recap-sev-1";

const std::vector<CorruptionKind>& all_corruption_kinds();
std::string_view corruption_name(CorruptionKind kind);
std::string_view corruption_family(CorruptionKind kind);  // noise|blur|weather|digital
CorruptionKind parse_corruption(std::string_view name);   // throws ConfigError
bool is_native(CorruptionKind kind);

// Canonical per-kind severity parameter, oriented so larger means stronger
// and strictly increasing in severity. Native kinds only.
double severity_strength(CorruptionKind kind, int severity);

// Human-readable row of the parameter table for the benchmark report.
std::string severity_parameters_description(CorruptionKind kind);

// Applies a native corruption. Deterministic under (seed, kind, severity,
// image index); output pixels are clamped to [0,1]; labels pass through
// untouched. Throws ConfigError for external-only kinds or severity outside
// 1..5.
ImageBatch corrupt(const ImageBatch& batch, CorruptionKind kind, int severity,
                   std::uint64_t seed);

// Individual operators, exposed for tests and bindings. Stochastic ones
// derive one stream per image from (seed, image index).
ImageBatch apply_gaussian_noise(const ImageBatch& batch, double sigma, std::uint64_t seed);
ImageBatch apply_shot_noise(const ImageBatch& batch, double photons, std::uint64_t seed);
ImageBatch apply_impulse_noise(const ImageBatch& batch, double rate, std::uint64_t seed);
ImageBatch apply_defocus_blur(const ImageBatch& batch, double radius);
ImageBatch apply_glass_blur(const ImageBatch& batch, int max_shift, int iterations,
                            std::uint64_t seed);
ImageBatch apply_motion_blur(const ImageBatch& batch, int length);
ImageBatch apply_zoom_blur(const ImageBatch& batch, double max_zoom);
ImageBatch apply_brightness(const ImageBatch& batch, double delta);
ImageBatch apply_contrast(const ImageBatch& batch, double factor);
ImageBatch apply_elastic_transform(const ImageBatch& batch, double alpha, double smoothing,
                                   std::uint64_t seed);
ImageBatch apply_pixelate(const ImageBatch& batch, int target_side);

// Scans a directory for files named <kind>_<severity>.npy and loads each one.
// Covers the external-only corruptions; native files produced by `corrupt`
// load the same way.
std::map<std::pair<CorruptionKind, int>, ImageBatch> load_external(
    const std::filesystem::path& directory, const std::vector<std::uint8_t>& labels);

}  // namespace recap

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace recap {

inline constexpr int kImageSide = 28;
inline constexpr int kImagePixels = kImageSide * kImageSide;
inline constexpr int kNumClasses = 10;

// A batch of 28x28 grayscale images with pixels in [0,1] and one label per
// image. `provenance` records where the batch came from: "clean", a
// kind/severity tag, or an external file digest.
struct ImageBatch {
  std::vector<float> pixels;  // n * 784, row-major per image
  std::vector<std::uint8_t> labels;
  std::string provenance = "clean";

  std::size_t size() const noexcept { return labels.size(); }

  const float* image(std::size_t index) const noexcept {
    return pixels.data() + index * kImagePixels;
  }
  float* image(std::size_t index) noexcept { return pixels.data() + index * kImagePixels; }

  void validate() const;  // throws DataError on count/range violations
};

// Flattens image `index` row-major into the d=784 reservoir input vector.
Eigen::VectorXd image_as_input(const ImageBatch& batch, std::size_t index);

}  // namespace recap

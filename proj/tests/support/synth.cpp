#include "support/synth.hpp"

#include <array>
#include <cmath>

#include "recap/prng.hpp"

namespace recap::testing {
namespace {

struct Segment {
  double x0, y0, x1, y1;
};

double segment_distance(const Segment& s, double px, double py) {
  const double vx = s.x1 - s.x0;
  const double vy = s.y1 - s.y0;
  const double wx = px - s.x0;
  const double wy = py - s.y0;
  const double norm_sq = vx * vx + vy * vy;
  double t = norm_sq > 0.0 ? (wx * vx + wy * vy) / norm_sq : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s.x0 + t * vx);
  const double dy = py - (s.y0 + t * vy);
  return std::hypot(dx, dy);
}

std::array<float, kImagePixels> render(const std::vector<Segment>& segments, int shift_x,
                                       int shift_y) {
  std::array<float, kImagePixels> image{};
  constexpr double stroke_sigma = 1.5;  // digit-like stroke width
  for (int y = 0; y < kImageSide; ++y)
    for (int x = 0; x < kImageSide; ++x) {
      double best = 1e9;
      for (const Segment& s : segments)
        best = std::min(best, segment_distance(s, x - shift_x, y - shift_y));
      image[y * kImageSide + x] =
          static_cast<float>(std::exp(-0.5 * (best * best) / (stroke_sigma * stroke_sigma)));
    }
  return image;
}

}  // namespace

Dataset make_synth_dataset(const SynthOptions& options) {
  // Class stroke layouts come from archetype_seed only, so train and test
  // splits drawn with different sample seeds share the same classes.
  std::vector<std::vector<Segment>> archetypes;
  for (int c = 0; c < options.classes; ++c) {
    Rng rng(derive_seed(options.archetype_seed, 0xa7c0 + static_cast<std::uint64_t>(c)));
    std::vector<Segment> segments;
    for (int s = 0; s < 3; ++s)
      segments.push_back({rng.uniform(5.0, 22.0), rng.uniform(5.0, 22.0),
                          rng.uniform(5.0, 22.0), rng.uniform(5.0, 22.0)});
    archetypes.push_back(std::move(segments));
  }

  Dataset dataset;
  dataset.split = "train";
  dataset.images.provenance = "synthetic";
  const std::size_t total =
      static_cast<std::size_t>(options.per_class) * static_cast<std::size_t>(options.classes);
  dataset.images.pixels.reserve(total * kImagePixels);
  dataset.images.labels.reserve(total);

  // Classes interleaved so class-conditional training sees them mixed.
  std::size_t index = 0;
  for (int i = 0; i < options.per_class; ++i)
    for (int c = 0; c < options.classes; ++c, ++index) {
      Rng rng(derive_seed(options.seed, 0x5a3000 + index));
      const int span = 2 * options.max_shift + 1;
      const int shift_x = static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) -
                          options.max_shift;
      const int shift_y = static_cast<int>(rng.below(static_cast<std::uint64_t>(span))) -
                          options.max_shift;
      const double gain = rng.uniform(0.85, 1.0);
      auto image = render(archetypes[static_cast<std::size_t>(c)], shift_x, shift_y);
      for (float& pixel : image) {
        const double value = gain * pixel + options.pixel_noise * rng.normal();
        pixel = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
      dataset.images.pixels.insert(dataset.images.pixels.end(), image.begin(), image.end());
      dataset.images.labels.push_back(static_cast<std::uint8_t>(c));
    }

  dataset.order_digest = compute_order_digest(dataset.images);
  return dataset;
}

}  // namespace recap::testing

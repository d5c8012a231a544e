#include "recap/encoding.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "recap/errors.hpp"

namespace recap {

void QuantizerSpec::validate() const {
  if (levels < 2) throw ConfigError("quantizer levels must be >= 2");
  if (levels > std::numeric_limits<std::uint16_t>::max())
    throw ConfigError("quantizer levels out of range");
  if (!(lo < hi)) throw ConfigError("quantizer range is empty");
}

LevelCode quantize(const StateVector& state, const QuantizerSpec& quantizer) {
  quantizer.validate();
  const int k_levels = quantizer.levels;
  LevelCode code;
  code.n_levels = static_cast<std::uint16_t>(k_levels);
  code.label = state.label;
  code.levels.resize(static_cast<std::size_t>(state.values.size()));

  const double width = quantizer.hi - quantizer.lo;
  for (Eigen::Index i = 0; i < state.values.size(); ++i) {
    double value = state.values[i];
    if (!std::isfinite(value)) throw DataError("non-finite state value at unit " + std::to_string(i));
    if (value < quantizer.lo) value = quantizer.lo;
    if (value > quantizer.hi) value = quantizer.hi;

    int level = static_cast<int>(std::floor((value - quantizer.lo) / width * k_levels));
    if (level < 0) level = 0;
    if (level > k_levels - 1) level = k_levels - 1;
    // Fix up against the exact edges so the result always satisfies
    // edge(level) <= value < edge(level+1) regardless of rounding in the
    // index expression above.
    while (level > 0 && value < quantizer.edge(level)) --level;
    while (level < k_levels - 1 && value >= quantizer.edge(level + 1)) ++level;
    code.levels[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(level);
  }
  return code;
}

CoactivationMask build_mask(const LevelCode& code) {
  const auto n = static_cast<std::uint32_t>(code.levels.size());
  CoactivationMask mask;
  mask.bits = SquareBitMatrix(n);
  mask.label = code.label;
  mask.level_buckets.assign(code.n_levels, {});
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint16_t level = code.levels[i];
    if (level >= code.n_levels) throw DataError("level code exceeds n_levels");
    mask.level_buckets[level].push_back(i);
  }

  // One packed row template per bucket; each member copies it and clears its
  // own diagonal bit.
  const std::uint32_t words_per_row = mask.bits.words_per_row();
  std::vector<std::uint64_t> row_template(words_per_row);
  for (const auto& bucket : mask.level_buckets) {
    if (bucket.size() < 2) continue;
    std::fill(row_template.begin(), row_template.end(), 0);
    for (std::uint32_t j : bucket) row_template[j >> 6] |= std::uint64_t{1} << (j & 63);
    for (std::uint32_t i : bucket) {
      auto row = mask.bits.row(i);
      for (std::uint32_t w = 0; w < words_per_row; ++w) row[w] = row_template[w];
      mask.bits.clear(i, i);
    }
  }
  return mask;
}

std::uint64_t mask_overlap(const CoactivationMask& a, const CoactivationMask& b) {
  if (a.n_units() != b.n_units())
    throw DataError("mask size mismatch: " + std::to_string(a.n_units()) + " vs " +
                    std::to_string(b.n_units()));
  return SquareBitMatrix::overlap(a.bits, b.bits);
}

}  // namespace recap

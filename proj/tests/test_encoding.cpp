#include <doctest.h>

#include <cmath>

#include "recap/encoding.hpp"
#include "recap/errors.hpp"
#include "recap/prng.hpp"
#include "support/oracles.hpp"

using namespace recap;
using namespace recap::testing;

namespace {

StateVector state_from(std::initializer_list<double> values) {
  StateVector state;
  state.values = Eigen::VectorXd(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) state.values[i++] = v;
  return state;
}

LevelCode code_from(std::initializer_list<int> levels, int n_levels) {
  LevelCode code;
  code.n_levels = static_cast<std::uint16_t>(n_levels);
  for (int level : levels) code.levels.push_back(static_cast<std::uint16_t>(level));
  return code;
}

}  // namespace

TEST_CASE("quantizer maps edges and interior points as specified") {
  QuantizerSpec q8;
  q8.levels = 8;
  const LevelCode code = quantize(state_from({-1.0, 0.0, 1.0}), q8);
  CHECK(code.levels[0] == 0);
  CHECK(code.levels[1] == 4);
  CHECK(code.levels[2] == 7);

  QuantizerSpec q2;
  q2.levels = 2;
  const LevelCode sign = quantize(state_from({-0.3, 0.7, -0.001}), q2);
  CHECK(sign.levels[0] == 0);
  CHECK(sign.levels[1] == 1);
  CHECK(sign.levels[2] == 0);
}

TEST_CASE("quantizer matches the linear-scan oracle on random values") {
  Rng rng(2024);
  for (int levels : {2, 4, 8}) {
    QuantizerSpec q;
    q.levels = levels;
    StateVector state;
    state.values = Eigen::VectorXd(1000);
    for (int i = 0; i < 1000; ++i) state.values[i] = rng.uniform(-1.0, 1.0);
    const LevelCode code = quantize(state, q);
    for (int i = 0; i < 1000; ++i)
      CHECK(code.levels[static_cast<std::size_t>(i)] ==
            oracle_quantize_scan(state.values[i], levels));
  }
}

TEST_CASE("quantizer is monotone and tolerates sub-epsilon perturbations") {
  Rng rng(99);
  QuantizerSpec q;
  q.levels = 8;
  const double width = 2.0 / q.levels;
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    const auto code = quantize(state_from({a, b}), q);
    if (a <= b)
      CHECK(code.levels[0] <= code.levels[1]);
    else
      CHECK(code.levels[0] >= code.levels[1]);
  }
  for (int trial = 0; trial < 2000; ++trial) {
    const double value = rng.uniform(-0.999, 0.999);
    const auto base = quantize(state_from({value}), q);
    const int level = base.levels[0];
    const double center = -1.0 + width * (level + 0.5);
    const double margin = width / 2.0 - std::abs(value - center);
    if (margin <= 1e-6) continue;  // too close to an edge for the claim to apply
    const double epsilon = margin * 0.9;
    const double delta = rng.uniform(-epsilon, epsilon);
    const auto perturbed = quantize(state_from({value + delta}), q);
    CHECK(perturbed.levels[0] == level);
  }
}

TEST_CASE("quantizer clamps float spill and rejects non-finite values") {
  QuantizerSpec q;
  q.levels = 8;
  const auto clamped = quantize(state_from({1.0 + 1e-13, -1.0 - 1e-13}), q);
  CHECK(clamped.levels[0] == 7);
  CHECK(clamped.levels[1] == 0);
  CHECK_THROWS_AS(quantize(state_from({std::nan("")}), q), DataError);
  QuantizerSpec bad;
  bad.levels = 1;
  CHECK_THROWS_AS(quantize(state_from({0.0}), bad), ConfigError);
}

TEST_CASE("mask of a tiny level code matches the worked example") {
  const CoactivationMask mask = build_mask(code_from({0, 0, 1}, 2));
  CHECK(mask.bits.test(0, 1));
  CHECK(mask.bits.test(1, 0));
  CHECK_FALSE(mask.bits.test(0, 0));
  CHECK_FALSE(mask.bits.test(0, 2));
  CHECK_FALSE(mask.bits.test(2, 0));
  CHECK_FALSE(mask.bits.test(1, 2));
  CHECK(mask.bits.popcount() == 2);
}

TEST_CASE("all units sharing a level give the complete off-diagonal mask") {
  const int n = 70;  // crosses a word boundary
  LevelCode code;
  code.n_levels = 4;
  code.levels.assign(n, 2);
  const CoactivationMask mask = build_mask(code);
  CHECK(mask.bits.popcount() == static_cast<std::uint64_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    CHECK(mask.bits.row_popcount(static_cast<std::uint32_t>(i)) ==
          static_cast<std::uint64_t>(n - 1));
}

TEST_CASE("random masks agree with the dense double-loop oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 16;
    const int levels = 4;
    std::vector<int> z(n);
    LevelCode code;
    code.n_levels = static_cast<std::uint16_t>(levels);
    for (int i = 0; i < n; ++i) {
      z[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(levels));
      code.levels.push_back(static_cast<std::uint16_t>(z[static_cast<std::size_t>(i)]));
    }
    const CoactivationMask mask = build_mask(code);
    const auto dense = oracle_mask_dense(z);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(static_cast<int>(mask.bits.test(static_cast<std::uint32_t>(i),
                                              static_cast<std::uint32_t>(j))) == dense[i][j]);

    // Symmetry, zero diagonal, bucket identity and the per-row popcount law.
    std::uint64_t bucket_pairs = 0;
    for (const auto& bucket : mask.level_buckets)
      bucket_pairs += static_cast<std::uint64_t>(bucket.size()) * (bucket.size() - 1);
    CHECK(bucket_pairs == mask.bits.popcount());
    for (int i = 0; i < n; ++i) {
      CHECK_FALSE(mask.bits.test(i, i));
      const std::size_t bucket_size =
          mask.level_buckets[static_cast<std::size_t>(z[static_cast<std::size_t>(i)])].size();
      CHECK(mask.bits.row_popcount(static_cast<std::uint32_t>(i)) == bucket_size - 1);
    }
  }
}

TEST_CASE("mask overlap is the AND-popcount and matches the oracle") {
  Rng rng(17);
  const int n = 16;
  auto random_code = [&](int lv) {
    LevelCode code;
    code.n_levels = static_cast<std::uint16_t>(lv);
    for (int i = 0; i < n; ++i)
      code.levels.push_back(static_cast<std::uint16_t>(rng.below(lv)));
    return code;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const LevelCode za = random_code(3);
    const LevelCode zb = random_code(3);
    const CoactivationMask a = build_mask(za);
    const CoactivationMask b = build_mask(zb);
    CHECK(mask_overlap(a, a) == a.bits.popcount());
    CHECK(mask_overlap(a, b) == mask_overlap(b, a));

    std::vector<int> za_int(za.levels.begin(), za.levels.end());
    std::vector<int> zb_int(zb.levels.begin(), zb.levels.end());
    CHECK(mask_overlap(a, b) == oracle_overlap(oracle_mask_dense(za_int), oracle_mask_dense(zb_int)));
  }
  const CoactivationMask zeros = build_mask(code_from({0, 1, 2, 3}, 4));
  const CoactivationMask ones = build_mask(code_from({0, 0, 0, 0}, 4));
  CHECK(mask_overlap(ones, zeros) == 0);

  const CoactivationMask small = build_mask(code_from({0, 0}, 2));
  CHECK_THROWS_AS(mask_overlap(small, ones), DataError);
}

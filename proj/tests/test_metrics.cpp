#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "recap/errors.hpp"
#include "recap/metrics.hpp"
#include "recap/prng.hpp"

using namespace recap;

namespace {

ErrorTable random_table(std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  ErrorTable table;
  table.model_name = "random";
  table.clean_error = rng.uniform(0.01, 0.2) * scale;
  for (CorruptionKind kind : all_corruption_kinds())
    for (int severity = 1; severity <= kNumSeverities; ++severity)
      table.errors[{kind, severity}] = rng.uniform(0.0, 0.9) * scale;
  return table;
}

}  // namespace

TEST_CASE("CE is one against itself and scales linearly") {
  const ErrorTable table = random_table(1);
  for (CorruptionKind kind : all_corruption_kinds())
    CHECK(corruption_error(table, table, kind) == 1.0);

  ErrorTable halved = table;
  for (auto& [key, error] : halved.errors) error *= 0.5;
  for (CorruptionKind kind : all_corruption_kinds())
    CHECK(corruption_error(halved, table, kind) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("CE matches a hand-summed oracle on random tables") {
  const ErrorTable table = random_table(7);
  const ErrorTable reference = random_table(8);
  for (CorruptionKind kind : all_corruption_kinds()) {
    double numerator = 0.0, denominator = 0.0;
    for (int severity = 1; severity <= 5; ++severity) {
      numerator += table.errors.at({kind, severity});
      denominator += reference.errors.at({kind, severity});
    }
    CHECK(std::abs(corruption_error(table, reference, kind) - numerator / denominator) <= 1e-12);
  }
}

TEST_CASE("CE and RelCE are invariant under a common positive rescale") {
  const ErrorTable table = random_table(21);
  const ErrorTable reference = random_table(22);
  const ErrorTable table_scaled = random_table(21, 0.37);
  const ErrorTable reference_scaled = random_table(22, 0.37);
  for (CorruptionKind kind : all_corruption_kinds()) {
    CHECK(corruption_error(table, reference, kind) ==
          doctest::Approx(corruption_error(table_scaled, reference_scaled, kind)).epsilon(1e-12));
    CHECK(*relative_ce(table, reference, kind) ==
          doctest::Approx(*relative_ce(table_scaled, reference_scaled, kind)).epsilon(1e-9));
  }
}

TEST_CASE("RelCE is zero when corruption never hurts and negative when it helps") {
  ErrorTable flat;
  flat.clean_error = 0.1;
  ErrorTable reference;
  reference.clean_error = 0.02;
  for (CorruptionKind kind : all_corruption_kinds())
    for (int severity = 1; severity <= 5; ++severity) {
      flat.errors[{kind, severity}] = 0.1;  // equal to clean -> zero numerator
      reference.errors[{kind, severity}] = 0.02 + 0.01 * severity;
    }
  for (CorruptionKind kind : all_corruption_kinds())
    CHECK(*relative_ce(flat, reference, kind) == 0.0);

  // Corrupted error below clean error: the numerator is negative.
  ErrorTable helped = flat;
  for (int severity = 1; severity <= 5; ++severity)
    helped.errors[{CorruptionKind::jpeg_compression, severity}] = 0.05;
  const auto value = relative_ce(helped, reference, CorruptionKind::jpeg_compression);
  CHECK(value.has_value());
  CHECK(*value < 0.0);
}

TEST_CASE("a zero reference denominator flags the kind and mCE excludes it") {
  ErrorTable table = random_table(3);
  ErrorTable reference = random_table(4);
  reference.clean_error = 0.1;
  for (int severity = 1; severity <= 5; ++severity)
    reference.errors[{CorruptionKind::fog, severity}] = 0.1;  // denominator == 0

  CHECK_FALSE(relative_ce(table, reference, CorruptionKind::fog).has_value());
  const MceResult result = relative_mce(table, reference);
  CHECK(result.excluded == std::vector<CorruptionKind>{CorruptionKind::fog});

  double sum = 0.0;
  for (CorruptionKind kind : all_corruption_kinds()) {
    if (kind == CorruptionKind::fog) continue;
    sum += *relative_ce(table, reference, kind);
  }
  CHECK(result.value == doctest::Approx(sum / 14.0).epsilon(1e-12));
}

TEST_CASE("self-normalized relative mCE is exactly one") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ErrorTable table = random_table(seed + 100);
    const MceResult result = relative_mce(table, table);
    CHECK(result.value == 1.0);
    CHECK(result.excluded.empty());
    CHECK(format_percent(result.value) == "100.0%");
  }
}

TEST_CASE("mCE requires every kind and CE rejects zero reference sums") {
  ErrorTable table = random_table(5);
  ErrorTable incomplete = random_table(6);
  incomplete.errors.erase({CorruptionKind::snow, 3});
  CHECK_THROWS_AS(relative_mce(table, incomplete), DataError);
  CHECK_THROWS_AS(relative_mce(incomplete, table), DataError);

  ErrorTable zero_ref = random_table(9);
  for (int severity = 1; severity <= 5; ++severity)
    zero_ref.errors[{CorruptionKind::snow, severity}] = 0.0;
  CHECK_THROWS_AS(corruption_error(table, zero_ref, CorruptionKind::snow), DataError);
}

TEST_CASE("error tables round-trip through the flat text format") {
  const auto dir = std::filesystem::temp_directory_path() / "recap_metrics_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / "table.txt";

  const ErrorTable table = random_table(11);
  save_error_table(table, path);
  const ErrorTable loaded = load_error_table(path);
  CHECK(loaded.clean_error == doctest::Approx(*table.clean_error).epsilon(1e-9));
  for (const auto& [key, error] : table.errors)
    CHECK(loaded.errors.at(key) == doctest::Approx(error).epsilon(1e-9));

  const auto bad = dir / "bad.txt";
  std::ofstream(bad) << "gaussian_noise,notanumber\n";
  CHECK_THROWS(load_error_table(bad));
  const auto out_of_range = dir / "range.txt";
  std::ofstream(out_of_range) << "gaussian_noise,1,1.5\n";
  CHECK_THROWS_AS(load_error_table(out_of_range), DataError);
}

TEST_CASE("percent rendering keeps one decimal") {
  CHECK(format_percent(0.341) == "34.1%");
  CHECK(format_percent(1.0) == "100.0%");
  CHECK(format_percent(-0.15) == "-15.0%");
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <cstdlib>

#include "recap/cli.hpp"
#include "recap/corruptions.hpp"
#include "recap/dataio.hpp"
#include "recap/errors.hpp"
#include "recap/metrics.hpp"
#include "recap/model_io.hpp"
#include "recap/prng.hpp"
#include "recap/threading.hpp"
#include "support/synth.hpp"

using namespace recap;
using namespace recap::testing;

namespace {

struct CliFixture {
  std::filesystem::path dir;
  std::filesystem::path train_images, train_labels;
  std::filesystem::path test_images, test_labels;

  CliFixture() {
    dir = std::filesystem::temp_directory_path() / "recap_cli_tests";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    SynthOptions train_options;
    train_options.per_class = 8;
    train_options.seed = 100;
    const Dataset train = make_synth_dataset(train_options);
    train_images = dir / "train-images-idx3-ubyte";
    train_labels = dir / "train-labels-idx1-ubyte";
    save_idx(train.images, train_images, train_labels);

    SynthOptions test_options;
    test_options.per_class = 5;
    test_options.seed = 200;
    const Dataset test = make_synth_dataset(test_options);
    test_images = dir / "t10k-images-idx3-ubyte";
    test_labels = dir / "t10k-labels-idx1-ubyte";
    save_idx(test.images, test_images, test_labels);
  }

  RunConfig small_config(const std::string& kind) const {
    RunConfig config;
    config.kind = kind;
    config.n_units = 48;
    config.steps = 15;
    config.seed = 7;
    config.threads = 2;
    return config;
  }
};

std::vector<char> file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string find_line(const std::string& text, const std::string& prefix) {
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line))
    if (line.rfind(prefix, 0) == 0) return line;
  return {};
}

}  // namespace

TEST_CASE("train/eval cycle produces deterministic models and reports") {
  const CliFixture fx;

  TrainOptions train;
  train.config = fx.small_config("recap");
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "model_a.rcap";
  std::ostringstream out_a;
  CHECK(cmd_train(train, out_a) == kExitOk);
  CHECK(find_line(out_a.str(), "class,updates,threshold,density") != "");

  train.model_out = fx.dir / "model_b.rcap";
  std::ostringstream out_b;
  CHECK(cmd_train(train, out_b) == kExitOk);
  CHECK(file_bytes(fx.dir / "model_a.rcap") == file_bytes(fx.dir / "model_b.rcap"));

  EvalOptions eval;
  eval.model = fx.dir / "model_a.rcap";
  eval.images = fx.test_images;
  eval.labels = fx.test_labels;
  eval.report_out = fx.dir / "eval_a.txt";
  std::ostringstream sink;
  CHECK(cmd_eval(eval, sink) == kExitOk);
  eval.report_out = fx.dir / "eval_b.txt";
  CHECK(cmd_eval(eval, sink) == kExitOk);
  CHECK(file_bytes(fx.dir / "eval_a.txt") == file_bytes(fx.dir / "eval_b.txt"));

  const std::string report((std::istreambuf_iterator<char>(
                               *std::make_unique<std::ifstream>(fx.dir / "eval_a.txt"))),
                           std::istreambuf_iterator<char>());
  CHECK(find_line(report, "error ") != "");
  CHECK(find_line(report, "confusion,") != "");
  CHECK(find_line(report, "dataset_digest ") != "");
}

TEST_CASE("subset flag bounds the update counts") {
  const CliFixture fx;
  TrainOptions train;
  train.config = fx.small_config("recap");
  train.config.subset_per_class = 2;
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "subset.rcap";
  std::ostringstream out;
  CHECK(cmd_train(train, out) == kExitOk);

  const LoadedModel loaded = load_model(train.model_out);
  const RecapModel& model = std::get<RecapModel>(loaded);
  std::uint64_t total = 0;
  for (const auto& prototype : model.templates) total += prototype.update_count;
  CHECK(total == 20);  // 2 per class x 10 classes
}

TEST_CASE("ridge training writes a loadable model with its own kind tag") {
  const CliFixture fx;
  TrainOptions train;
  train.config = fx.small_config("ridge");
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "ridge.rcap";
  std::ostringstream out;
  CHECK(cmd_train(train, out) == kExitOk);
  CHECK(peek_model_kind(train.model_out) == ModelKind::ridge);
  CHECK(find_line(out.str(), "train_residual ") != "");

  EvalOptions eval;
  eval.model = train.model_out;
  eval.images = fx.test_images;
  eval.labels = fx.test_labels;
  std::ostringstream report;
  CHECK(cmd_eval(eval, report) == kExitOk);
  CHECK(find_line(report.str(), "model_kind ridge") != "");
}

TEST_CASE("corrupt converts formats and benchmark self-normalizes to 100 percent") {
  const CliFixture fx;

  // Train a tiny model.
  TrainOptions train;
  train.config = fx.small_config("recap");
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "bench_model.rcap";
  std::ostringstream sink;
  REQUIRE(cmd_train(train, sink) == kExitOk);

  // Build a full corruption directory: clean + labels + all 15 kinds x 5.
  const auto bench_dir = fx.dir / "mnist_c";
  std::filesystem::create_directories(bench_dir);

  CorruptOptions convert;
  convert.input = fx.test_images;
  convert.labels_in = fx.test_labels;
  convert.output = bench_dir / "clean.npy";
  convert.labels_out = bench_dir / "labels.npy";
  REQUIRE(cmd_corrupt(convert, sink) == kExitOk);

  for (CorruptionKind kind : all_corruption_kinds()) {
    for (int severity = 1; severity <= kNumSeverities; ++severity) {
      CorruptOptions options;
      // External-only kinds cannot be generated natively; stand-in files are
      // fine for exercising the benchmark plumbing.
      options.kind = is_native(kind) ? std::string(corruption_name(kind)) : "brightness";
      options.severity = severity;
      options.seed = 11;
      options.input = bench_dir / "clean.npy";
      options.output = bench_dir / (std::string(corruption_name(kind)) + "_" +
                                    std::to_string(severity) + ".npy");
      REQUIRE(cmd_corrupt(options, sink) == kExitOk);
    }
  }

  BenchmarkOptions bench;
  bench.model = train.model_out;
  bench.directory = bench_dir;
  bench.report_out = fx.dir / "bench_a.txt";
  bench.csv_out = fx.dir / "bench.csv";
  REQUIRE(cmd_benchmark(bench, sink) == kExitOk);
  bench.report_out = fx.dir / "bench_b.txt";
  REQUIRE(cmd_benchmark(bench, sink) == kExitOk);
  CHECK(file_bytes(fx.dir / "bench_a.txt") == file_bytes(fx.dir / "bench_b.txt"));

  std::ifstream report_file(fx.dir / "bench_a.txt");
  const std::string report((std::istreambuf_iterator<char>(report_file)),
                           std::istreambuf_iterator<char>());
  CHECK(find_line(report, "reference self") != "");
  CHECK(find_line(report, "relative_mce 100.0%") != "");
  CHECK(find_line(report, "severity_table " + std::string(kSeverityTableVersion)) != "");
  CHECK(find_line(report, "note corruption severity parameters are implementation-defined") != "");
  CHECK(find_line(report, "clean_error ") != "");

  const std::string csv((std::istreambuf_iterator<char>(
                            *std::make_unique<std::ifstream>(fx.dir / "bench.csv"))),
                        std::istreambuf_iterator<char>());
  CHECK(find_line(csv, "kind,severity,error,n,provenance") != "");
  CHECK(find_line(csv, "gaussian_noise,1,") != "");
}

TEST_CASE("benchmark against a reference file emits CE and RelCE lines") {
  const CliFixture fx;
  TrainOptions train;
  train.config = fx.small_config("recap");
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "ref_model.rcap";
  std::ostringstream sink;
  REQUIRE(cmd_train(train, sink) == kExitOk);

  const auto bench_dir = fx.dir / "ref_bench";
  std::filesystem::create_directories(bench_dir);
  CorruptOptions convert;
  convert.input = fx.test_images;
  convert.labels_in = fx.test_labels;
  convert.output = bench_dir / "clean.npy";
  convert.labels_out = bench_dir / "labels.npy";
  REQUIRE(cmd_corrupt(convert, sink) == kExitOk);
  for (int severity = 1; severity <= kNumSeverities; ++severity) {
    CorruptOptions options;
    options.kind = "gaussian_noise";
    options.severity = severity;
    options.seed = 3;
    options.input = bench_dir / "clean.npy";
    options.output = bench_dir / ("gaussian_noise_" + std::to_string(severity) + ".npy");
    REQUIRE(cmd_corrupt(options, sink) == kExitOk);
  }

  // Reference table covering every kind, written through the metrics module.
  ErrorTable reference;
  reference.model_name = "reference";
  reference.clean_error = 0.021;
  for (CorruptionKind kind : all_corruption_kinds())
    for (int severity = 1; severity <= kNumSeverities; ++severity)
      reference.errors[{kind, severity}] = 0.05 + 0.03 * severity;
  const auto reference_path = fx.dir / "reference.txt";
  save_error_table(reference, reference_path);

  BenchmarkOptions bench;
  bench.model = train.model_out;
  bench.directory = bench_dir;
  bench.reference = reference_path;
  std::ostringstream out;
  REQUIRE(cmd_benchmark(bench, out) == kExitOk);
  CHECK(find_line(out.str(), "reference file:0x") != "");
  const std::string metrics_line = find_line(out.str(), "metrics gaussian_noise,");
  CHECK(metrics_line.find('%') != std::string::npos);
  // Only gaussian files exist, so the mean over all 15 kinds is unavailable.
  CHECK(find_line(out.str(), "relative_mce unavailable") != "");
}

TEST_CASE("a clean-only directory yields a raw report with mCE unavailable") {
  const CliFixture fx;
  TrainOptions train;
  train.config = fx.small_config("recap");
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "clean_only_model.rcap";
  std::ostringstream sink;
  REQUIRE(cmd_train(train, sink) == kExitOk);

  const auto bench_dir = fx.dir / "clean_only";
  std::filesystem::create_directories(bench_dir);
  CorruptOptions convert;
  convert.input = fx.test_images;
  convert.labels_in = fx.test_labels;
  convert.output = bench_dir / "clean.npy";
  convert.labels_out = bench_dir / "labels.npy";
  REQUIRE(cmd_corrupt(convert, sink) == kExitOk);

  BenchmarkOptions bench;
  bench.model = train.model_out;
  bench.directory = bench_dir;
  std::ostringstream out;
  REQUIRE(cmd_benchmark(bench, out) == kExitOk);
  CHECK(find_line(out.str(), "clean_error ") != "");
  CHECK(find_line(out.str(), "relative_mce unavailable") != "");
  CHECK(find_line(out.str(), "warning missing gaussian_noise severity 1") != "");
}

TEST_CASE("inspect dumps densities and histograms") {
  const CliFixture fx;
  TrainOptions train;
  train.config = fx.small_config("recap");
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "inspect_model.rcap";
  std::ostringstream sink;
  REQUIRE(cmd_train(train, sink) == kExitOk);

  InspectOptions inspect;
  inspect.model = train.model_out;
  std::ostringstream out;
  CHECK(cmd_inspect(inspect, out) == kExitOk);
  CHECK(find_line(out.str(), "class,updates,threshold,density") != "");

  inspect.images = fx.test_images;
  inspect.labels = fx.test_labels;
  std::ostringstream with_hist;
  CHECK(cmd_inspect(inspect, with_hist) == kExitOk);
  CHECK(find_line(with_hist.str(), "histogram ") != "");
}

TEST_CASE("the shipped default config matches the built-in defaults") {
  RunConfig from_file;
  apply_config_file(from_file, std::filesystem::path(RECAP_SOURCE_DIR) / "configs/default.conf");
  const RunConfig defaults;
  CHECK(from_file.digest() == defaults.digest());
}

TEST_CASE("defaults reproduce the published hyperparameters") {
  const RunConfig config;
  CHECK(config.n_units == 1024);
  CHECK(config.spectral_radius == 1.0);
  CHECK(config.leak_rate == 0.5);
  CHECK(config.sparsity == 0.9);
  CHECK(config.steps == 60);
  CHECK(config.levels == 8);
  CHECK(config.potentiation == 0.6);
  CHECK(config.decay == 0.96);
  CHECK(config.sparsity_fraction == 0.3);
  CHECK(config.ridge_beta == 1e-5);
  CHECK(config.classes == 10);
  CHECK(config.epochs == 1);
}

TEST_CASE("templates planted from per-sample masks classify those samples perfectly") {
  const CliFixture fx;
  const Dataset full = load_idx(fx.train_images, fx.train_labels, "train");
  const Dataset one_per_class = subset(full, 1, 3);

  RunConfig config = fx.small_config("recap");
  RecapModel model;
  model.reservoir = build_reservoir(config.reservoir_spec());
  model.quantizer = config.quantizer_spec();
  model.hebb = config.hebb_spec();
  model.meta.seed = config.seed;
  model.meta.prng_id = kPrngId;
  model.templates.resize(10);
  for (int c = 0; c < 10; ++c) {
    model.templates[static_cast<std::size_t>(c)].class_id = c;
    model.templates[static_cast<std::size_t>(c)].bits =
        SquareBitMatrix(static_cast<std::uint32_t>(config.n_units));
  }
  for (std::size_t i = 0; i < one_per_class.size(); ++i) {
    StateVector state = run_to_average(model.reservoir, image_as_input(one_per_class.images, i));
    const CoactivationMask mask = build_mask(quantize(state, model.quantizer));
    model.templates[one_per_class.images.labels[i]].bits = mask.bits;
  }
  const auto model_path = fx.dir / "planted.rcap";
  save_model(model, model_path);

  const auto images = fx.dir / "one-images-idx3-ubyte";
  const auto labels = fx.dir / "one-labels-idx1-ubyte";
  save_idx(one_per_class.images, images, labels);

  EvalOptions eval;
  eval.model = model_path;
  eval.images = images;
  eval.labels = labels;
  std::ostringstream out;
  REQUIRE(cmd_eval(eval, out) == kExitOk);
  CHECK(find_line(out.str(), "errors 0") != "");
  CHECK(find_line(out.str(), "accuracy 1") != "");
}

TEST_CASE("evaluating an empty dataset is an explicit data error") {
  const CliFixture fx;
  TrainOptions train;
  train.config = fx.small_config("recap");
  train.config.subset_per_class = 1;
  train.images = fx.train_images;
  train.labels = fx.train_labels;
  train.model_out = fx.dir / "empty_eval_model.rcap";
  std::ostringstream sink;
  REQUIRE(cmd_train(train, sink) == kExitOk);

  ImageBatch empty;
  const auto images = fx.dir / "empty-images-idx3-ubyte";
  const auto labels = fx.dir / "empty-labels-idx1-ubyte";
  save_idx(empty, images, labels);

  EvalOptions eval;
  eval.model = train.model_out;
  eval.images = images;
  eval.labels = labels;
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_eval(eval, out), DataError);
}

TEST_CASE("RECAP_THREADS is the fallback for thread resolution") {
  setenv("RECAP_THREADS", "3", 1);
  CHECK(resolve_threads(0) == 3);
  CHECK(resolve_threads(5) == 5);  // explicit request wins
  unsetenv("RECAP_THREADS");
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("run_cli maps errors to the documented exit codes") {
  const CliFixture fx;
  const std::string model = (fx.dir / "cli_model.rcap").string();

  {
    const char* argv[] = {"recap",        "train",
                          "--images",     fx.train_images.c_str(),
                          "--labels",     fx.train_labels.c_str(),
                          "--out",        model.c_str(),
                          "--n-units",    "32",
                          "--steps",      "10",
                          "--subset",     "2",
                          "--threads",    "2"};
    CHECK(run_cli(static_cast<int>(std::size(argv)), argv) == kExitOk);
  }
  {
    // Unknown corruption kind -> config error.
    const std::string out = (fx.dir / "x.npy").string();
    const char* argv[] = {"recap", "corrupt", "--kind", "sharpen",
                          "--in",  fx.test_images.c_str(), "--out", out.c_str()};
    CHECK(run_cli(static_cast<int>(std::size(argv)), argv) == kExitConfig);
  }
  {
    // Missing data file -> data error.
    const std::string missing = (fx.dir / "nope").string();
    const char* argv[] = {"recap",    "eval",           "--model", model.c_str(),
                          "--images", missing.c_str(),  "--labels", missing.c_str()};
    CHECK(run_cli(static_cast<int>(std::size(argv)), argv) == kExitData);
  }
  {
    // Invalid hyperparameter -> config error.
    const char* argv[] = {"recap",    "train",
                          "--images", fx.train_images.c_str(),
                          "--labels", fx.train_labels.c_str(),
                          "--out",    model.c_str(),
                          "--leak-rate", "0.0"};
    CHECK(run_cli(static_cast<int>(std::size(argv)), argv) == kExitConfig);
  }
  {
    // Degenerate spectrum (all-zero recurrent matrix) -> numeric failure.
    const char* argv[] = {"recap",    "train",
                          "--images", fx.train_images.c_str(),
                          "--labels", fx.train_labels.c_str(),
                          "--out",    model.c_str(),
                          "--n-units", "3",
                          "--sparsity", "0.99",
                          "--subset",  "1"};
    CHECK(run_cli(static_cast<int>(std::size(argv)), argv) == kExitNumeric);
  }
}

TEST_CASE("config files feed the digest and flags override them") {
  const CliFixture fx;
  const auto config_path = fx.dir / "run.conf";
  std::ofstream(config_path) << "# desk-scale run\n"
                             << "n_units = 32\n"
                             << "steps = 10\n"
                             << "seed = 99\n";
  RunConfig config;
  apply_config_file(config, config_path);
  CHECK(config.n_units == 32);
  CHECK(config.steps == 10);
  CHECK(config.seed == 99);

  RunConfig defaults;
  CHECK(config.digest() != defaults.digest());
  RunConfig same;
  apply_config_file(same, config_path);
  CHECK(config.digest() == same.digest());

  std::ofstream(fx.dir / "bad.conf") << "unknown_key = 3\n";
  RunConfig bad;
  CHECK_THROWS_AS(apply_config_file(bad, fx.dir / "bad.conf"), ConfigError);

  // Flag overrides file: exercised through run_cli with a config file.
  const std::string model = (fx.dir / "cfg_model.rcap").string();
  const std::string cfg = config_path.string();
  const char* argv[] = {"recap",   "train",     "--config", cfg.c_str(),
                        "--images", fx.train_images.c_str(), "--labels", fx.train_labels.c_str(),
                        "--out",   model.c_str(), "--subset", "1",
                        "--n-units", "24"};
  REQUIRE(run_cli(static_cast<int>(std::size(argv)), argv) == kExitOk);
  const LoadedModel loaded = load_model(model);
  CHECK(std::get<RecapModel>(loaded).reservoir.spec.n_units == 24);  // flag wins
  CHECK(std::get<RecapModel>(loaded).reservoir.spec.seed == 99);     // file value kept
}

#include <CLI11.hpp>
#include <iostream>

#include "recap/cli.hpp"
#include "recap/errors.hpp"

namespace recap {
namespace {

// File values form the base; any flag the user actually passed wins.
RunConfig merge_config(const CLI::App& cmd, const RunConfig& flags, RunConfig base) {
  if (cmd.count("--n-units")) base.n_units = flags.n_units;
  if (cmd.count("--spectral-radius")) base.spectral_radius = flags.spectral_radius;
  if (cmd.count("--leak-rate")) base.leak_rate = flags.leak_rate;
  if (cmd.count("--sparsity")) base.sparsity = flags.sparsity;
  if (cmd.count("--steps")) base.steps = flags.steps;
  if (cmd.count("--washout")) base.washout = flags.washout;
  if (cmd.count("--levels")) base.levels = flags.levels;
  if (cmd.count("--potentiation")) base.potentiation = flags.potentiation;
  if (cmd.count("--decay")) base.decay = flags.decay;
  if (cmd.count("--sparsity-fraction")) base.sparsity_fraction = flags.sparsity_fraction;
  if (cmd.count("--classes")) base.classes = flags.classes;
  if (cmd.count("--ridge-beta")) base.ridge_beta = flags.ridge_beta;
  if (cmd.count("--kind")) base.kind = flags.kind;
  if (cmd.count("--seed")) base.seed = flags.seed;
  if (cmd.count("--epochs")) base.epochs = flags.epochs;
  if (cmd.count("--subset")) base.subset_per_class = flags.subset_per_class;
  if (cmd.count("--subset-seed")) base.subset_seed = flags.subset_seed;
  if (cmd.count("--threads")) base.threads = flags.threads;
  if (cmd.count("--keep-states")) base.keep_states = flags.keep_states;
  return base;
}

// Registers one flag per RunConfig key; names match the config-file schema.
void add_config_flags(CLI::App* cmd, RunConfig& config, std::string& config_path) {
  cmd->add_option("--config", config_path, "key = value config file");
  cmd->add_option("--n-units", config.n_units, "reservoir units");
  cmd->add_option("--spectral-radius", config.spectral_radius, "recurrent spectral radius");
  cmd->add_option("--leak-rate", config.leak_rate, "leaking rate in (0,1]");
  cmd->add_option("--sparsity", config.sparsity, "fraction of zero recurrent weights");
  cmd->add_option("--steps", config.steps, "reservoir cycles per image");
  cmd->add_option("--washout", config.washout, "steps excluded from the average");
  cmd->add_option("--levels", config.levels, "quantization levels");
  cmd->add_option("--potentiation", config.potentiation, "Hebbian potentiation rate");
  cmd->add_option("--decay", config.decay, "Hebbian decay rate");
  cmd->add_option("--sparsity-fraction", config.sparsity_fraction, "template density target");
  cmd->add_option("--classes", config.classes, "number of classes");
  cmd->add_option("--ridge-beta", config.ridge_beta, "ridge regularization");
  cmd->add_option("--kind", config.kind, "model kind: recap | ridge");
  cmd->add_option("--seed", config.seed, "reservoir seed");
  cmd->add_option("--epochs", config.epochs, "passes over the training set");
  cmd->add_option("--subset", config.subset_per_class, "stratified samples per class (0 = all)");
  cmd->add_option("--subset-seed", config.subset_seed, "subsampling seed");
  cmd->add_option("--threads", config.threads, "worker threads (0 = auto / RECAP_THREADS)");
  cmd->add_flag("--keep-states", config.keep_states,
                "store continuous prototype states for resumable training");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"RECAP: reservoir co-activation prototype classifier"};
  app.require_subcommand(1);

  TrainOptions train;
  std::string train_config_file;
  auto* train_cmd = app.add_subcommand("train", "train a model on clean images");
  add_config_flags(train_cmd, train.config, train_config_file);
  train_cmd->add_option("--images", train.images, "training images (IDX or NPY)")->required();
  train_cmd->add_option("--labels", train.labels, "training labels (IDX or NPY)")->required();
  train_cmd->add_option("--out", train.model_out, "output model file")->required();

  EvalOptions eval;
  std::string eval_report;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
  eval_cmd->add_option("--model", eval.model, "model file")->required();
  eval_cmd->add_option("--images", eval.images, "images (IDX or NPY)")->required();
  eval_cmd->add_option("--labels", eval.labels, "labels (IDX or NPY)")->required();
  eval_cmd->add_option("--report", eval_report, "write the report here instead of stdout");
  eval_cmd->add_option("--threads", eval.threads, "worker threads");

  CorruptOptions corrupt;
  std::string corrupt_kind, corrupt_labels_in, corrupt_labels_out;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "generate a corrupted NPY batch");
  corrupt_cmd->add_option("--kind", corrupt_kind,
                          "corruption kind (omit to convert format only)");
  corrupt_cmd->add_option("--severity", corrupt.severity, "severity 1..5");
  corrupt_cmd->add_option("--seed", corrupt.seed, "corruption seed");
  corrupt_cmd->add_option("--in", corrupt.input, "input images (IDX or NPY)")->required();
  corrupt_cmd->add_option("--out", corrupt.output, "output NPY images")->required();
  corrupt_cmd->add_option("--labels-in", corrupt_labels_in, "labels to attach (IDX or NPY)");
  corrupt_cmd->add_option("--labels-out", corrupt_labels_out, "write labels as NPY here");

  BenchmarkOptions benchmark;
  std::string benchmark_reference, benchmark_report, benchmark_csv;
  auto* benchmark_cmd =
      app.add_subcommand("benchmark", "per-corruption errors plus CE/RelCE/mCE");
  benchmark_cmd->add_option("--model", benchmark.model, "model file")->required();
  benchmark_cmd->add_option("--dir", benchmark.directory,
                            "directory with labels.npy, clean.npy and <kind>_<severity>.npy")
      ->required();
  benchmark_cmd->add_option("--reference", benchmark_reference,
                            "reference error table (kind,severity,error)");
  benchmark_cmd->add_option("--report", benchmark_report,
                            "write the report here instead of stdout");
  benchmark_cmd->add_option("--csv", benchmark_csv, "write the raw error table as CSV");
  benchmark_cmd->add_option("--threads", benchmark.threads, "worker threads");

  InspectOptions inspect;
  std::string inspect_images, inspect_labels;
  auto* inspect_cmd =
      app.add_subcommand("inspect", "dump template densities and score histograms");
  inspect_cmd->add_option("--model", inspect.model, "model file")->required();
  inspect_cmd->add_option("--images", inspect_images, "optional images for score histograms");
  inspect_cmd->add_option("--labels", inspect_labels, "labels for --images");
  inspect_cmd->add_option("--threads", inspect.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) {
      if (!train_config_file.empty()) {
        RunConfig from_file;
        apply_config_file(from_file, train_config_file);
        train.config = merge_config(*train_cmd, train.config, from_file);
      }
      return cmd_train(train, std::cout);
    }
    if (eval_cmd->parsed()) {
      if (!eval_report.empty()) eval.report_out = eval_report;
      return cmd_eval(eval, std::cout);
    }
    if (corrupt_cmd->parsed()) {
      if (!corrupt_kind.empty()) corrupt.kind = corrupt_kind;
      if (!corrupt_labels_in.empty()) corrupt.labels_in = corrupt_labels_in;
      if (!corrupt_labels_out.empty()) corrupt.labels_out = corrupt_labels_out;
      return cmd_corrupt(corrupt, std::cout);
    }
    if (benchmark_cmd->parsed()) {
      if (!benchmark_reference.empty()) benchmark.reference = benchmark_reference;
      if (!benchmark_report.empty()) benchmark.report_out = benchmark_report;
      if (!benchmark_csv.empty()) benchmark.csv_out = benchmark_csv;
      return cmd_benchmark(benchmark, std::cout);
    }
    if (inspect_cmd->parsed()) {
      if (!inspect_images.empty()) inspect.images = inspect_images;
      if (!inspect_labels.empty()) inspect.labels = inspect_labels;
      return cmd_inspect(inspect, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}

}  // namespace recap

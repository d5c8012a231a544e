#include "recap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>
#include <vector>

#include "recap/corruptions.hpp"
#include "recap/dataio.hpp"
#include "recap/digest.hpp"
#include "recap/errors.hpp"
#include "recap/metrics.hpp"
#include "recap/model_io.hpp"
#include "recap/prng.hpp"
#include "recap/threading.hpp"

namespace recap {
namespace {

std::string format_fraction(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

int model_classes(const LoadedModel& model) {
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, RecapModel>)
          return m.hebb.classes;
        else
          return m.readout.classes;
      },
      model);
}

const ModelMeta& model_meta(const LoadedModel& model) {
  return std::visit([](const auto& m) -> const ModelMeta& { return m.meta; }, model);
}

std::string model_kind_name(const LoadedModel& model) {
  return std::holds_alternative<RecapModel>(model) ? "recap" : "ridge";
}

std::vector<int> predict_any(const LoadedModel& model, const ImageBatch& batch, int threads) {
  if (const auto* recap_model = std::get_if<RecapModel>(&model))
    return predict_batch(*recap_model, batch, threads);
  return predict_ridge_batch(std::get<EsnRidgeModel>(model), batch, threads);
}

struct EvalResult {
  std::size_t n = 0;
  std::size_t wrong = 0;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]

  double error() const { return n ? static_cast<double>(wrong) / static_cast<double>(n) : 0.0; }
};

EvalResult evaluate_batch(const LoadedModel& model, const ImageBatch& batch, int threads) {
  const int classes = model_classes(model);
  EvalResult result;
  result.n = batch.size();
  result.confusion.assign(classes, std::vector<std::uint64_t>(classes, 0));
  const std::vector<int> predictions = predict_any(model, batch, threads);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int truth = batch.labels[i];
    const int predicted = predictions[i];
    if (truth >= classes) throw DataError("label exceeds model class count");
    ++result.confusion[truth][predicted];
    if (predicted != truth) ++result.wrong;
  }
  return result;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path.string());
  return out;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  Digest64 digest;
  char buffer[4096];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0)
    digest.update(buffer, static_cast<std::size_t>(in.gcount()));
  return digest.value();
}

}  // namespace

int cmd_train(const TrainOptions& options, std::ostream& out) {
  RunConfig config = options.config;
  config.validate();

  Dataset dataset = load_dataset(options.images, options.labels, "train");
  if (config.subset_per_class > 0)
    dataset = subset(dataset, config.subset_per_class, config.subset_seed);
  const int threads = resolve_threads(config.threads);

  ModelMeta meta;
  meta.seed = config.seed;
  meta.prng_id = kPrngId;
  meta.config_digest = config.digest();
  meta.dataset_digest = dataset.order_digest;

  out << "# recap train summary\n";
  out << "kind " << config.kind << "\n";
  out << "config_digest " << format_digest(meta.config_digest) << "\n";
  out << "dataset_digest " << format_digest(meta.dataset_digest) << "\n";
  out << "seed " << config.seed << "\n";
  out << "prng " << kPrngId << "\n";
  out << "samples " << dataset.size() << "\n";
  out << "epochs " << config.epochs << "\n";

  ReservoirWeights reservoir = build_reservoir(config.reservoir_spec());

  if (config.kind == "recap") {
    std::vector<PrototypeState> states = train_prototypes(
        dataset, reservoir, config.quantizer_spec(), config.hebb_spec(), config.epochs, threads);
    RecapModel model;
    model.reservoir = std::move(reservoir);
    model.quantizer = config.quantizer_spec();
    model.hebb = config.hebb_spec();
    model.meta = meta;
    for (const auto& state : states)
      model.templates.push_back(binarize(state, config.sparsity_fraction));
    if (config.keep_states) model.states = std::move(states);
    save_model(model, options.model_out, config.keep_states);

    out << "class,updates,threshold,density\n";
    for (const auto& prototype : model.templates)
      out << prototype.class_id << "," << prototype.update_count << ","
          << format_fraction(prototype.threshold) << "," << format_fraction(prototype.density())
          << "\n";
  } else {
    const Eigen::MatrixXd states = average_states(reservoir, dataset.images, threads);
    std::vector<int> labels(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = dataset.images.labels[i];
    EsnRidgeModel model;
    model.spec = config.ridge_spec();
    model.readout = fit_ridge(states, labels, config.classes, model.spec);
    model.reservoir = std::move(reservoir);
    model.meta = meta;
    save_model(model, options.model_out);

    // Training residual and error, for the summary only.
    double residual_sq = 0.0;
    std::size_t wrong = 0;
    for (Eigen::Index i = 0; i < states.rows(); ++i) {
      const Eigen::VectorXd scores = ridge_scores(model.readout, states.row(i).transpose());
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < scores.size(); ++c)
        if (scores[c] > scores[best]) best = c;
      if (static_cast<int>(best) != labels[static_cast<std::size_t>(i)]) ++wrong;
      for (Eigen::Index c = 0; c < scores.size(); ++c) {
        const double target = labels[static_cast<std::size_t>(i)] == static_cast<int>(c) ? 1.0 : 0.0;
        residual_sq += (scores[c] - target) * (scores[c] - target);
      }
    }
    out << "train_residual " << format_fraction(std::sqrt(residual_sq)) << "\n";
    out << "train_error "
        << format_fraction(static_cast<double>(wrong) / static_cast<double>(dataset.size()))
        << "\n";
  }
  out << "written " << options.model_out.string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& options, std::ostream& out) {
  const LoadedModel model = load_model(options.model);
  const Dataset dataset = load_dataset(options.images, options.labels, "test");
  if (dataset.size() == 0) throw DataError("evaluation dataset is empty");
  const EvalResult result =
      evaluate_batch(model, dataset.images, resolve_threads(options.threads));

  std::ostringstream report;
  const ModelMeta& meta = model_meta(model);
  report << "# recap eval report\n";
  report << "model_kind " << model_kind_name(model) << "\n";
  report << "config_digest " << format_digest(meta.config_digest) << "\n";
  report << "model_dataset_digest " << format_digest(meta.dataset_digest) << "\n";
  report << "dataset_digest " << format_digest(dataset.order_digest) << "\n";
  report << "seed " << meta.seed << "\n";
  report << "severity_table " << kSeverityTableVersion << "\n";
  report << "n " << result.n << "\n";
  report << "errors " << result.wrong << "\n";
  report << "error " << format_fraction(result.error()) << "\n";
  report << "accuracy " << format_fraction(1.0 - result.error()) << "\n";
  report << "confusion,true,predicted,count\n";
  for (std::size_t truth = 0; truth < result.confusion.size(); ++truth)
    for (std::size_t predicted = 0; predicted < result.confusion.size(); ++predicted)
      if (result.confusion[truth][predicted] > 0)
        report << "confusion," << truth << "," << predicted << ","
               << result.confusion[truth][predicted] << "\n";

  if (options.report_out) {
    auto file = open_out(*options.report_out);
    file << report.str();
  } else {
    out << report.str();
  }
  return kExitOk;
}

int cmd_corrupt(const CorruptOptions& options, std::ostream& out) {
  std::vector<std::uint8_t> labels;
  if (options.labels_in) labels = load_labels_file(*options.labels_in);

  ImageBatch batch = load_images_file(options.input);
  if (!labels.empty()) {
    if (labels.size() != batch.size())
      throw DataError("label count does not match image count");
    batch.labels = labels;
  }
  batch.validate();

  if (options.kind && !options.kind->empty()) {
    const CorruptionKind kind = parse_corruption(*options.kind);
    batch = corrupt(batch, kind, options.severity, options.seed);
  }
  save_npy_batch(batch, options.output);
  out << "written " << options.output.string() << "\n";
  out << "provenance " << batch.provenance << "\n";
  out << "n " << batch.size() << "\n";

  if (options.labels_out) {
    if (labels.empty()) throw ConfigError("--labels-out requires --labels-in");
    save_npy_labels(labels, *options.labels_out);
    out << "written " << options.labels_out->string() << "\n";
  }
  return kExitOk;
}

int cmd_benchmark(const BenchmarkOptions& options, std::ostream& out) {
  const LoadedModel model = load_model(options.model);
  const int threads = resolve_threads(options.threads);
  const ModelMeta& meta = model_meta(model);

  const auto labels_path = options.directory / "labels.npy";
  if (!std::filesystem::exists(labels_path))
    throw DataError("corruption directory is missing labels.npy: " + options.directory.string());
  const std::vector<std::uint8_t> labels = load_labels_file(labels_path);

  Digest64 labels_digest;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels_digest.update_value(static_cast<std::uint32_t>(i));
    labels_digest.update_value(labels[i]);
  }

  ErrorTable table;
  table.model_name = model_kind_name(model);

  struct RawRow {
    CorruptionKind kind;
    int severity;
    double error;
    std::size_t n;
    std::string provenance;
  };
  std::vector<RawRow> rows;

  const auto clean_path = options.directory / "clean.npy";
  std::string clean_provenance = "absent";
  if (std::filesystem::exists(clean_path)) {
    const ImageBatch clean = load_npy_batch(clean_path, labels);
    table.clean_error = evaluate_batch(model, clean, threads).error();
    clean_provenance = clean.provenance;
  }

  const auto batches = load_external(options.directory, labels);
  std::vector<std::pair<CorruptionKind, int>> missing;
  for (CorruptionKind kind : all_corruption_kinds())
    for (int severity = 1; severity <= kNumSeverities; ++severity)
      if (!batches.contains({kind, severity})) missing.emplace_back(kind, severity);

  for (const auto& [key, batch] : batches) {
    const double error = evaluate_batch(model, batch, threads).error();
    table.errors[key] = error;
    rows.push_back({key.first, key.second, error, batch.size(), batch.provenance});
  }

  ReferenceTable reference;
  std::string reference_tag;
  if (options.reference) {
    reference = load_error_table(*options.reference);
    reference_tag = "file:" + format_digest(file_digest(*options.reference));
  } else {
    reference = table;  // self-normalized: Relative mCE is 100% by construction
    reference_tag = "self";
  }

  std::ostringstream report;
  report << "# recap benchmark report\n";
  report << "model_kind " << model_kind_name(model) << "\n";
  report << "config_digest " << format_digest(meta.config_digest) << "\n";
  report << "model_dataset_digest " << format_digest(meta.dataset_digest) << "\n";
  report << "dataset_digest " << format_digest(labels_digest.value()) << "\n";
  report << "seed " << meta.seed << "\n";
  report << "severity_table " << kSeverityTableVersion << "\n";
  report << "reference " << reference_tag << "\n";
  report << "note corruption severity parameters are implementation-defined (version "
         << kSeverityTableVersion
         << "); comparisons against published corruption benchmarks additionally require the "
            "original corrupted test sets and the original reference error table\n";
  for (CorruptionKind kind : all_corruption_kinds())
    if (is_native(kind))
      report << "parameters " << corruption_name(kind) << " "
             << severity_parameters_description(kind) << "\n";
  for (const auto& [kind, severity] : missing)
    report << "warning missing " << corruption_name(kind) << " severity " << severity << "\n";

  report << "clean_provenance " << clean_provenance << "\n";
  if (table.clean_error)
    report << "clean_error " << format_fraction(*table.clean_error) << "\n";
  else
    report << "clean_error unavailable\n";

  report << "table kind,severity,error,n,provenance\n";
  for (const RawRow& row : rows)
    report << "table " << corruption_name(row.kind) << "," << row.severity << ","
           << format_fraction(row.error) << "," << row.n << "," << row.provenance << "\n";

  // Per-kind normalized metrics wherever both tables are complete for the
  // kind and clean errors exist.
  report << "metrics kind,ce,relce\n";
  const bool cleans_present = table.clean_error.has_value() && reference.clean_error.has_value();
  std::vector<CorruptionKind> undefined_relce;
  for (CorruptionKind kind : all_corruption_kinds()) {
    if (!table.complete_for(kind) || !reference.complete_for(kind)) continue;
    const double ce = corruption_error(table, reference, kind);
    std::string relce_text = "undefined";
    if (cleans_present) {
      const auto relce = relative_ce(table, reference, kind);
      if (relce.has_value())
        relce_text = format_percent(*relce);
      else
        undefined_relce.push_back(kind);
    }
    report << "metrics " << corruption_name(kind) << "," << format_percent(ce) << ","
           << relce_text << "\n";
  }
  for (CorruptionKind kind : undefined_relce)
    report << "warning relce_undefined " << corruption_name(kind)
           << " (zero reference denominator, excluded from mCE)\n";

  if (table.complete() && reference.complete()) {
    const MceResult mce = relative_mce(table, reference);
    report << "relative_mce " << format_percent(mce.value) << "\n";
  } else if (!table.clean_error.has_value()) {
    report << "relative_mce unavailable (clean.npy not present)\n";
  } else if (!table.complete()) {
    report << "relative_mce unavailable (" << missing.size() << " corruption batches missing)\n";
  } else {
    report << "relative_mce unavailable (reference table incomplete)\n";
  }

  if (options.csv_out) {
    auto csv = open_out(*options.csv_out);
    csv << "kind,severity,error,n,provenance\n";
    if (table.clean_error)
      csv << "clean,," << format_fraction(*table.clean_error) << "," << labels.size() << ","
          << clean_provenance << "\n";
    for (const RawRow& row : rows)
      csv << corruption_name(row.kind) << "," << row.severity << ","
          << format_fraction(row.error) << "," << row.n << "," << row.provenance << "\n";
  }

  if (options.report_out) {
    auto file = open_out(*options.report_out);
    file << report.str();
  } else {
    out << report.str();
  }
  return kExitOk;
}

int cmd_inspect(const InspectOptions& options, std::ostream& out) {
  const LoadedModel model = load_model(options.model);
  const ModelMeta& meta = model_meta(model);
  out << "# recap inspect\n";
  out << "model_kind " << model_kind_name(model) << "\n";
  out << "format_version " << meta.format_version << "\n";
  out << "config_digest " << format_digest(meta.config_digest) << "\n";
  out << "dataset_digest " << format_digest(meta.dataset_digest) << "\n";
  out << "seed " << meta.seed << "\n";
  out << "prng " << meta.prng_id << "\n";

  if (const auto* recap_model = std::get_if<RecapModel>(&model)) {
    const ReservoirSpec& spec = recap_model->reservoir.spec;
    out << "n_units " << spec.n_units << "\n";
    out << "levels " << recap_model->quantizer.levels << "\n";
    out << "sparsity_fraction " << format_fraction(recap_model->hebb.sparsity_fraction) << "\n";
    out << "has_states " << (recap_model->states.empty() ? 0 : 1) << "\n";
    out << "class,updates,threshold,density\n";
    for (const auto& prototype : recap_model->templates)
      out << prototype.class_id << "," << prototype.update_count << ","
          << format_fraction(prototype.threshold) << "," << format_fraction(prototype.density())
          << "\n";
  } else {
    const auto& ridge_model = std::get<EsnRidgeModel>(model);
    out << "n_units " << ridge_model.reservoir.spec.n_units << "\n";
    out << "ridge_beta " << format_fraction(ridge_model.spec.regularization) << "\n";
    out << "weights " << ridge_model.readout.weights.rows() << "x"
        << ridge_model.readout.weights.cols() << "\n";
  }

  if (options.images && options.labels) {
    const Dataset dataset = load_dataset(*options.images, *options.labels, "test");
    if (const auto* recap_model = std::get_if<RecapModel>(&model)) {
      // Per-class overlap-score histograms across the dataset.
      const int classes = recap_model->hebb.classes;
      std::vector<std::vector<std::uint64_t>> scores(classes);
      std::uint64_t max_score = 0;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Prediction prediction =
            predict(*recap_model, image_as_input(dataset.images, i));
        for (int c = 0; c < classes; ++c) {
          scores[c].push_back(prediction.scores[c]);
          max_score = std::max(max_score, prediction.scores[c]);
        }
      }
      constexpr int kBins = 8;
      const std::uint64_t width = std::max<std::uint64_t>(1, (max_score + kBins) / kBins);
      out << "histogram class,bin_lo,bin_hi,count\n";
      for (int c = 0; c < classes; ++c) {
        std::vector<std::uint64_t> bins(kBins, 0);
        for (std::uint64_t s : scores[c])
          ++bins[std::min<std::uint64_t>(kBins - 1, s / width)];
        for (int b = 0; b < kBins; ++b)
          out << "histogram " << c << "," << b * width << "," << (b + 1) * width << ","
              << bins[b] << "\n";
      }
    } else {
      const EvalResult result = evaluate_batch(model, dataset.images, resolve_threads(options.threads));
      out << "eval_error " << format_fraction(result.error()) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace recap

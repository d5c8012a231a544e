#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "recap/cli.hpp"
#include "recap/corruptions.hpp"
#include "recap/dataio.hpp"
#include "recap/errors.hpp"
#include "recap/metrics.hpp"
#include "recap/model_io.hpp"
#include "recap/prng.hpp"
#include "recap/prototype.hpp"
#include "recap/ridge.hpp"

namespace py = pybind11;
using namespace recap;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

// Accepts (n, 784) or (n, 28, 28) pixel arrays in [0,1].
ImageBatch batch_from_numpy(const DoubleArray& images, const IntArray& labels) {
  const auto info = images.request();
  std::size_t n = 0;
  if (info.ndim == 2 && info.shape[1] == kImagePixels) {
    n = static_cast<std::size_t>(info.shape[0]);
  } else if (info.ndim == 3 && info.shape[1] == kImageSide && info.shape[2] == kImageSide) {
    n = static_cast<std::size_t>(info.shape[0]);
  } else {
    throw DataError("images must have shape (n, 784) or (n, 28, 28)");
  }
  const auto label_info = labels.request();
  if (label_info.ndim != 1 || static_cast<std::size_t>(label_info.shape[0]) != n)
    throw DataError("labels must have shape (n,)");

  ImageBatch batch;
  batch.pixels.resize(n * kImagePixels);
  const double* pixels = static_cast<const double*>(info.ptr);
  for (std::size_t i = 0; i < n * kImagePixels; ++i)
    batch.pixels[i] = static_cast<float>(pixels[i]);
  batch.labels.resize(n);
  const auto* raw_labels = static_cast<const std::int64_t*>(label_info.ptr);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw_labels[i] < 0 || raw_labels[i] >= kNumClasses)
      throw DataError("labels must be in 0..9");
    batch.labels[i] = static_cast<std::uint8_t>(raw_labels[i]);
  }
  batch.validate();
  return batch;
}

ImageBatch batch_from_pixels(const DoubleArray& images) {
  const auto info = images.request();
  std::size_t n = 0;
  if (info.ndim == 3 && info.shape[1] == kImageSide && info.shape[2] == kImageSide)
    n = static_cast<std::size_t>(info.shape[0]);
  else if (info.ndim == 2 && info.shape[1] == kImagePixels)
    n = static_cast<std::size_t>(info.shape[0]);
  else
    throw DataError("images must have shape (n, 784) or (n, 28, 28)");
  ImageBatch batch;
  batch.pixels.resize(n * kImagePixels);
  const double* pixels = static_cast<const double*>(info.ptr);
  for (std::size_t i = 0; i < n * kImagePixels; ++i)
    batch.pixels[i] = static_cast<float>(pixels[i]);
  batch.labels.assign(n, 0);
  batch.validate();
  return batch;
}

py::array_t<double> batch_to_numpy(const ImageBatch& batch) {
  py::array_t<double> out({batch.size(), static_cast<std::size_t>(kImageSide),
                           static_cast<std::size_t>(kImageSide)});
  double* data = out.mutable_data();
  for (std::size_t i = 0; i < batch.pixels.size(); ++i)
    data[i] = static_cast<double>(batch.pixels[i]);
  return out;
}

Eigen::VectorXd input_from_numpy(const DoubleArray& image) {
  const auto info = image.request();
  std::size_t count = 1;
  for (py::ssize_t d = 0; d < info.ndim; ++d) count *= static_cast<std::size_t>(info.shape[d]);
  if (count != kImagePixels) throw DataError("expected 784 pixels");
  Eigen::VectorXd input(kImagePixels);
  const double* data = static_cast<const double*>(info.ptr);
  for (int i = 0; i < kImagePixels; ++i) input[i] = data[i];
  return input;
}

struct PyRecapModel {
  RecapModel model;

  int predict_one(const DoubleArray& image) const {
    return predict(model, input_from_numpy(image)).class_id;
  }
  py::array_t<std::uint64_t> scores(const DoubleArray& image) const {
    const Prediction prediction = predict(model, input_from_numpy(image));
    py::array_t<std::uint64_t> out(prediction.scores.size());
    std::copy(prediction.scores.begin(), prediction.scores.end(), out.mutable_data());
    return out;
  }
  py::array_t<std::int64_t> predict_many(const DoubleArray& images, int threads) const {
    ImageBatch batch = batch_from_pixels(images);
    const std::vector<int> predictions = predict_batch(model, batch, threads);
    py::array_t<std::int64_t> out(predictions.size());
    std::copy(predictions.begin(), predictions.end(), out.mutable_data());
    return out;
  }
  double template_density(int class_id) const {
    return model.templates.at(static_cast<std::size_t>(class_id)).density();
  }
  double threshold(int class_id) const {
    return model.templates.at(static_cast<std::size_t>(class_id)).threshold;
  }
  void save(const std::string& path, bool include_states) const {
    save_model(model, path, include_states);
  }
};

struct PyRidgeModel {
  EsnRidgeModel model;

  int predict_one(const DoubleArray& image) const {
    return predict_ridge(model, input_from_numpy(image));
  }
  py::array_t<std::int64_t> predict_many(const DoubleArray& images, int threads) const {
    ImageBatch batch = batch_from_pixels(images);
    const std::vector<int> predictions = predict_ridge_batch(model, batch, threads);
    py::array_t<std::int64_t> out(predictions.size());
    std::copy(predictions.begin(), predictions.end(), out.mutable_data());
    return out;
  }
  void save(const std::string& path) const { save_model(model, path); }
};

PyRecapModel train_recap_py(const DoubleArray& images, const IntArray& labels,
                            const ReservoirSpec& rspec, const QuantizerSpec& qspec,
                            const HebbSpec& hspec, int epochs, int threads) {
  const ImageBatch batch = batch_from_numpy(images, labels);
  Dataset dataset;
  dataset.images = batch;
  dataset.order_digest = compute_order_digest(dataset.images);

  PyRecapModel wrapper;
  wrapper.model.reservoir = build_reservoir(rspec);
  wrapper.model.quantizer = qspec;
  wrapper.model.hebb = hspec;
  std::vector<PrototypeState> states =
      train_prototypes(dataset, wrapper.model.reservoir, qspec, hspec, epochs, threads);
  for (const auto& state : states)
    wrapper.model.templates.push_back(binarize(state, hspec.sparsity_fraction));
  wrapper.model.states = std::move(states);
  wrapper.model.meta.seed = rspec.seed;
  wrapper.model.meta.prng_id = kPrngId;
  wrapper.model.meta.dataset_digest = dataset.order_digest;
  return wrapper;
}

PyRidgeModel train_ridge_py(const DoubleArray& images, const IntArray& labels,
                            const ReservoirSpec& rspec, const RidgeSpec& spec, int classes,
                            int threads) {
  const ImageBatch batch = batch_from_numpy(images, labels);
  PyRidgeModel wrapper;
  wrapper.model.reservoir = build_reservoir(rspec);
  wrapper.model.spec = spec;
  const Eigen::MatrixXd states = average_states(wrapper.model.reservoir, batch, threads);
  std::vector<int> int_labels(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) int_labels[i] = batch.labels[i];
  wrapper.model.readout = fit_ridge(states, int_labels, classes, spec);
  wrapper.model.meta.seed = rspec.seed;
  wrapper.model.meta.prng_id = kPrngId;
  return wrapper;
}

py::object load_model_py(const std::string& path) {
  LoadedModel loaded = load_model(path);
  if (auto* recap_model = std::get_if<RecapModel>(&loaded))
    return py::cast(PyRecapModel{std::move(*recap_model)});
  return py::cast(PyRidgeModel{std::move(std::get<EsnRidgeModel>(loaded))});
}

}  // namespace

PYBIND11_MODULE(_recap, m) {
  m.doc() = "Reservoir co-activation prototype classifier (RECAP) core bindings";
  m.attr("PRNG_ID") = kPrngId;
  m.attr("SEVERITY_TABLE_VERSION") = kSeverityTableVersion;
  m.attr("MODEL_FORMAT_VERSION") = kModelFormatVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  py::class_<ReservoirSpec>(m, "ReservoirSpec")
      .def(py::init([](int n_units, double spectral_radius, double leak_rate, double sparsity,
                       int input_dim, int steps, int washout, std::uint64_t seed) {
             ReservoirSpec spec{n_units, spectral_radius, leak_rate, sparsity,
                                input_dim, steps, washout, seed};
             spec.validate();
             return spec;
           }),
           py::arg("n_units") = 1024, py::arg("spectral_radius") = 1.0,
           py::arg("leak_rate") = 0.5, py::arg("sparsity") = 0.9,
           py::arg("input_dim") = kImagePixels, py::arg("steps") = 60, py::arg("washout") = 0,
           py::arg("seed") = 1)
      .def_readwrite("n_units", &ReservoirSpec::n_units)
      .def_readwrite("spectral_radius", &ReservoirSpec::spectral_radius)
      .def_readwrite("leak_rate", &ReservoirSpec::leak_rate)
      .def_readwrite("sparsity", &ReservoirSpec::sparsity)
      .def_readwrite("input_dim", &ReservoirSpec::input_dim)
      .def_readwrite("steps", &ReservoirSpec::steps)
      .def_readwrite("washout", &ReservoirSpec::washout)
      .def_readwrite("seed", &ReservoirSpec::seed);

  py::class_<QuantizerSpec>(m, "QuantizerSpec")
      .def(py::init([](int levels) {
             QuantizerSpec spec;
             spec.levels = levels;
             spec.validate();
             return spec;
           }),
           py::arg("levels") = 8)
      .def_readwrite("levels", &QuantizerSpec::levels);

  py::class_<HebbSpec>(m, "HebbSpec")
      .def(py::init([](double potentiation, double decay, int classes, double sparsity_fraction) {
             HebbSpec spec{potentiation, decay, classes, sparsity_fraction};
             spec.validate();
             return spec;
           }),
           py::arg("potentiation") = 0.6, py::arg("decay") = 0.96,
           py::arg("classes") = kNumClasses, py::arg("sparsity_fraction") = 0.3)
      .def_readwrite("potentiation", &HebbSpec::potentiation)
      .def_readwrite("decay", &HebbSpec::decay)
      .def_readwrite("classes", &HebbSpec::classes)
      .def_readwrite("sparsity_fraction", &HebbSpec::sparsity_fraction);

  py::class_<RidgeSpec>(m, "RidgeSpec")
      .def(py::init([](double regularization, bool include_bias) {
             RidgeSpec spec{regularization, include_bias};
             spec.validate();
             return spec;
           }),
           py::arg("regularization") = 1e-5, py::arg("include_bias") = true)
      .def_readwrite("regularization", &RidgeSpec::regularization)
      .def_readwrite("include_bias", &RidgeSpec::include_bias);

  py::class_<ReservoirWeights>(m, "Reservoir")
      .def(py::init(&build_reservoir), py::arg("spec"))
      .def_property_readonly("spec", [](const ReservoirWeights& w) { return w.spec; })
      .def(
          "run_to_average",
          [](const ReservoirWeights& weights, const DoubleArray& input) -> Eigen::VectorXd {
            return run_to_average(weights, input_from_numpy(input)).values;
          },
          py::arg("input"), "Time-averaged state for one flattened [0,1] image");

  m.def(
      "quantize",
      [](const Eigen::VectorXd& values, const QuantizerSpec& spec) {
        StateVector state;
        state.values = values;
        const LevelCode code = quantize(state, spec);
        py::array_t<std::uint16_t> out(code.levels.size());
        std::copy(code.levels.begin(), code.levels.end(), out.mutable_data());
        return out;
      },
      py::arg("values"), py::arg("spec"), "Discretize a state vector into K levels");

  py::class_<CoactivationMask>(m, "CoactivationMask")
      .def_property_readonly("n_units", &CoactivationMask::n_units)
      .def_property_readonly("popcount",
                             [](const CoactivationMask& mask) { return mask.bits.popcount(); })
      .def("overlap", &mask_overlap, py::arg("other"))
      .def("to_dense", [](const CoactivationMask& mask) {
        const std::uint32_t n = mask.n_units();
        py::array_t<bool> out({n, n});
        bool* data = out.mutable_data();
        for (std::uint32_t i = 0; i < n; ++i)
          for (std::uint32_t j = 0; j < n; ++j) data[std::size_t{i} * n + j] = mask.bits.test(i, j);
        return out;
      });

  m.def(
      "build_mask",
      [](const py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>& levels,
         int n_levels) {
        LevelCode code;
        code.n_levels = static_cast<std::uint16_t>(n_levels);
        code.levels.assign(levels.data(), levels.data() + levels.size());
        return build_mask(code);
      },
      py::arg("levels"), py::arg("n_levels"),
      "Co-activation mask of a level code (symmetric, zero diagonal)");

  py::class_<PyRecapModel>(m, "RecapModel")
      .def("predict", &PyRecapModel::predict_one, py::arg("image"))
      .def("predict_batch", &PyRecapModel::predict_many, py::arg("images"), py::arg("threads") = 1)
      .def("scores", &PyRecapModel::scores, py::arg("image"))
      .def("template_density", &PyRecapModel::template_density, py::arg("class_id"))
      .def("threshold", &PyRecapModel::threshold, py::arg("class_id"))
      .def("save", &PyRecapModel::save, py::arg("path"), py::arg("include_states") = false)
      .def_property_readonly("classes",
                             [](const PyRecapModel& m_) { return m_.model.hebb.classes; })
      .def_property_readonly("seed", [](const PyRecapModel& m_) { return m_.model.meta.seed; });

  py::class_<PyRidgeModel>(m, "RidgeModel")
      .def("predict", &PyRidgeModel::predict_one, py::arg("image"))
      .def("predict_batch", &PyRidgeModel::predict_many, py::arg("images"), py::arg("threads") = 1)
      .def("save", &PyRidgeModel::save, py::arg("path"))
      .def_property_readonly("classes",
                             [](const PyRidgeModel& m_) { return m_.model.readout.classes; });

  m.def("train_recap", &train_recap_py, py::arg("images"), py::arg("labels"),
        py::arg("reservoir_spec") = ReservoirSpec{}, py::arg("quantizer_spec") = QuantizerSpec{},
        py::arg("hebb_spec") = HebbSpec{}, py::arg("epochs") = 1, py::arg("threads") = 1,
        "Train class prototypes on clean images (class-conditional Hebbian updates)");
  m.def("train_ridge", &train_ridge_py, py::arg("images"), py::arg("labels"),
        py::arg("reservoir_spec") = ReservoirSpec{}, py::arg("ridge_spec") = RidgeSpec{},
        py::arg("classes") = kNumClasses, py::arg("threads") = 1,
        "Fit the ESN-Ridge baseline on the same reservoir features");
  m.def("load", &load_model_py, py::arg("path"), "Load a RECAP or ESN-Ridge model container");

  m.def("corruption_kinds", [] {
    std::vector<std::string> names;
    for (CorruptionKind kind : all_corruption_kinds())
      names.emplace_back(corruption_name(kind));
    return names;
  });
  m.def(
      "is_native_corruption",
      [](const std::string& name) { return is_native(parse_corruption(name)); },
      py::arg("kind"));
  m.def(
      "severity_strength",
      [](const std::string& name, int severity) {
        return severity_strength(parse_corruption(name), severity);
      },
      py::arg("kind"), py::arg("severity"));
  m.def(
      "corrupt",
      [](const DoubleArray& images, const std::string& kind, int severity, std::uint64_t seed) {
        const ImageBatch batch = batch_from_pixels(images);
        return batch_to_numpy(corrupt(batch, parse_corruption(kind), severity, seed));
      },
      py::arg("images"), py::arg("kind"), py::arg("severity"), py::arg("seed") = 1,
      "Apply a native corruption to a batch of [0,1] images");

  py::class_<ErrorTable>(m, "ErrorTable")
      .def(py::init([](const std::string& name) {
             ErrorTable table;
             table.model_name = name;
             return table;
           }),
           py::arg("name") = "model")
      .def("set_clean", [](ErrorTable& t, double e) { t.clean_error = e; })
      .def("set_error",
           [](ErrorTable& t, const std::string& kind, int severity, double error) {
             t.errors[{parse_corruption(kind), severity}] = error;
           })
      .def_property_readonly("complete", &ErrorTable::complete);
  m.def(
      "corruption_error",
      [](const ErrorTable& t, const ErrorTable& ref, const std::string& kind) {
        return corruption_error(t, ref, parse_corruption(kind));
      },
      py::arg("table"), py::arg("reference"), py::arg("kind"));
  m.def(
      "relative_ce",
      [](const ErrorTable& t, const ErrorTable& ref, const std::string& kind) -> py::object {
        const auto value = relative_ce(t, ref, parse_corruption(kind));
        return value.has_value() ? py::cast(*value) : py::none();
      },
      py::arg("table"), py::arg("reference"), py::arg("kind"));
  m.def(
      "relative_mce",
      [](const ErrorTable& t, const ErrorTable& ref) {
        const MceResult result = relative_mce(t, ref);
        std::vector<std::string> excluded;
        for (CorruptionKind kind : result.excluded)
          excluded.emplace_back(corruption_name(kind));
        return py::make_tuple(result.value, excluded);
      },
      py::arg("table"), py::arg("reference"),
      "Mean RelCE over the 15 corruption kinds; returns (value, excluded_kinds)");
}

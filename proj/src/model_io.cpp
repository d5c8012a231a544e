#include "recap/model_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "recap/digest.hpp"
#include "recap/errors.hpp"

namespace recap {
namespace {

constexpr char kMagic[4] = {'R', 'C', 'A', 'P'};

// All multi-byte fields little-endian; this writer/reader pair is the only
// code that touches the byte layout.
class Writer {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    buffer_.insert(buffer_.end(), p, p + size);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(bits);
  }
  void str(const std::string& s) {
    u16(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }

  void finish(const std::filesystem::path& path) {
    Digest64 digest;
    digest.update(buffer_.data(), buffer_.size());
    u64(digest.value());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out.write(reinterpret_cast<const char*>(buffer_.data()),
              static_cast<std::streamsize>(buffer_.size()));
    if (!out) throw DataError("failed writing model file: " + path.string());
  }

 private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t b = 0; b < sizeof(T); ++b) buffer_.push_back((v >> (8 * b)) & 0xff);
  }
  std::vector<unsigned char> buffer_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path_);
    buffer_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (buffer_.size() < 4 + 2 + 2 + 8) throw DataError("model file too short: " + path_);

    Digest64 digest;
    digest.update(buffer_.data(), buffer_.size() - 8);
    std::uint64_t stored = 0;
    for (std::size_t b = 0; b < 8; ++b)
      stored |= std::uint64_t{static_cast<unsigned char>(buffer_[buffer_.size() - 8 + b])}
                << (8 * b);
    if (stored != digest.value()) throw DataError("model file checksum mismatch: " + path_);
    end_ = buffer_.size() - 8;
  }

  void bytes(void* out, std::size_t size) {
    if (pos_ + size > end_) throw DataError("model file truncated: " + path_);
    std::memcpy(out, buffer_.data() + pos_, size);
    pos_ += size;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() {
    const std::uint32_t bits = get_le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    const std::uint64_t bits = get_le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint16_t size = u16();
    std::string s(size, '\0');
    bytes(s.data(), size);
    return s;
  }

 private:
  template <typename T>
  T get_le() {
    T v = 0;
    if (pos_ + sizeof(T) > end_) throw DataError("model file truncated: " + path_);
    for (std::size_t b = 0; b < sizeof(T); ++b)
      v |= static_cast<T>(static_cast<unsigned char>(buffer_[pos_ + b])) << (8 * b);
    pos_ += sizeof(T);
    return v;
  }

  std::string path_;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

void write_header(Writer& w, ModelKind kind) {
  w.bytes(kMagic, 4);
  w.u16(kModelFormatVersion);
  w.u16(static_cast<std::uint16_t>(kind));
}

ModelKind read_header(Reader& r, const std::filesystem::path& path) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("bad model magic in " + path.string());
  const std::uint16_t version = r.u16();
  if (version != kModelFormatVersion)
    throw DataError("unsupported model format version " + std::to_string(version));
  const std::uint16_t kind = r.u16();
  if (kind != static_cast<std::uint16_t>(ModelKind::recap) &&
      kind != static_cast<std::uint16_t>(ModelKind::ridge))
    throw DataError("unknown model kind tag " + std::to_string(kind));
  return static_cast<ModelKind>(kind);
}

void write_reservoir_spec(Writer& w, const ReservoirSpec& spec) {
  w.u64(spec.seed);
  w.u32(static_cast<std::uint32_t>(spec.n_units));
  w.f64(spec.spectral_radius);
  w.f64(spec.leak_rate);
  w.f64(spec.sparsity);
  w.u32(static_cast<std::uint32_t>(spec.input_dim));
  w.u32(static_cast<std::uint32_t>(spec.steps));
  w.u32(static_cast<std::uint32_t>(spec.washout));
}

ReservoirSpec read_reservoir_spec(Reader& r) {
  ReservoirSpec spec;
  spec.seed = r.u64();
  spec.n_units = static_cast<int>(r.u32());
  spec.spectral_radius = r.f64();
  spec.leak_rate = r.f64();
  spec.sparsity = r.f64();
  spec.input_dim = static_cast<int>(r.u32());
  spec.steps = static_cast<int>(r.u32());
  spec.washout = static_cast<int>(r.u32());
  return spec;
}

void write_meta(Writer& w, const ModelMeta& meta) {
  w.str(meta.prng_id);
  w.u64(meta.config_digest);
  w.u64(meta.dataset_digest);
}

ModelMeta read_meta(Reader& r, std::uint64_t seed) {
  ModelMeta meta;
  meta.seed = seed;
  meta.prng_id = r.str();
  meta.config_digest = r.u64();
  meta.dataset_digest = r.u64();
  return meta;
}

}  // namespace

void save_model(const RecapModel& model, const std::filesystem::path& path, bool include_states) {
  model.validate();
  Writer w;
  write_header(w, ModelKind::recap);
  write_reservoir_spec(w, model.reservoir.spec);
  write_meta(w, model.meta);

  w.u32(static_cast<std::uint32_t>(model.quantizer.levels));
  w.f64(model.quantizer.lo);
  w.f64(model.quantizer.hi);
  w.f64(model.hebb.potentiation);
  w.f64(model.hebb.decay);
  w.u32(static_cast<std::uint32_t>(model.hebb.classes));
  w.f64(model.hebb.sparsity_fraction);

  w.u32(static_cast<std::uint32_t>(model.templates.size()));
  for (const auto& prototype : model.templates) {
    w.u32(static_cast<std::uint32_t>(prototype.class_id));
    w.f32(prototype.threshold);
    w.u64(prototype.update_count);
    const auto words = prototype.bits.words();
    for (std::uint64_t word : words) w.u64(word);
  }

  w.u8(include_states && !model.states.empty() ? 1 : 0);
  if (include_states && !model.states.empty()) {
    if (model.states.size() != model.templates.size())
      throw DataError("state block must hold one state per class");
    for (const auto& state : model.states) {
      w.u64(state.update_count);
      for (float value : state.strengths) w.f32(value);
    }
  }
  w.finish(path);
}

void save_model(const EsnRidgeModel& model, const std::filesystem::path& path) {
  Writer w;
  write_header(w, ModelKind::ridge);
  write_reservoir_spec(w, model.reservoir.spec);
  write_meta(w, model.meta);

  w.f64(model.spec.regularization);
  w.u8(model.spec.include_bias ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(model.readout.classes));
  w.u32(static_cast<std::uint32_t>(model.readout.weights.rows()));
  w.u32(static_cast<std::uint32_t>(model.readout.weights.cols()));
  for (Eigen::Index row = 0; row < model.readout.weights.rows(); ++row)
    for (Eigen::Index col = 0; col < model.readout.weights.cols(); ++col)
      w.f64(model.readout.weights(row, col));
  w.finish(path);
}

LoadedModel load_model(const std::filesystem::path& path) {
  Reader r(path);
  const ModelKind kind = read_header(r, path);
  const ReservoirSpec spec = read_reservoir_spec(r);
  const ModelMeta meta = read_meta(r, spec.seed);

  if (kind == ModelKind::recap) {
    RecapModel model;
    model.reservoir = build_reservoir(spec);
    model.meta = meta;
    model.quantizer.levels = static_cast<int>(r.u32());
    model.quantizer.lo = r.f64();
    model.quantizer.hi = r.f64();
    model.hebb.potentiation = r.f64();
    model.hebb.decay = r.f64();
    model.hebb.classes = static_cast<int>(r.u32());
    model.hebb.sparsity_fraction = r.f64();

    const std::uint32_t n_templates = r.u32();
    const auto n_units = static_cast<std::uint32_t>(spec.n_units);
    model.templates.reserve(n_templates);
    for (std::uint32_t t = 0; t < n_templates; ++t) {
      PrototypeTemplate prototype;
      prototype.class_id = static_cast<int>(r.u32());
      prototype.threshold = r.f32();
      prototype.update_count = r.u64();
      prototype.bits = SquareBitMatrix(n_units);
      auto words = prototype.bits.words();
      for (auto& word : words) word = r.u64();
      model.templates.push_back(std::move(prototype));
    }

    if (r.u8() == 1) {
      model.states.reserve(n_templates);
      for (std::uint32_t t = 0; t < n_templates; ++t) {
        PrototypeState state = make_prototype_state(static_cast<int>(t), n_units);
        state.update_count = r.u64();
        for (float& value : state.strengths) value = r.f32();
        model.states.push_back(std::move(state));
      }
    }
    model.validate();
    return model;
  }

  EsnRidgeModel model;
  model.reservoir = build_reservoir(spec);
  model.meta = meta;
  model.spec.regularization = r.f64();
  model.spec.include_bias = r.u8() == 1;
  model.readout.classes = static_cast<int>(r.u32());
  model.readout.include_bias = model.spec.include_bias;
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  model.readout.weights.resize(rows, cols);
  for (std::uint32_t row = 0; row < rows; ++row)
    for (std::uint32_t col = 0; col < cols; ++col)
      model.readout.weights(row, col) = r.f64();
  return model;
}

ModelKind peek_model_kind(const std::filesystem::path& path) {
  Reader r(path);
  return read_header(r, path);
}

}  // namespace recap

#include "recap/dataio.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <vector>

#include "recap/digest.hpp"
#include "recap/errors.hpp"
#include "recap/npy.hpp"
#include "recap/prng.hpp"

namespace recap {
namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

// gzread handles both gzip-compressed and plain files.
class GzFile {
 public:
  explicit GzFile(const std::filesystem::path& path)
      : file_(gzopen(path.string().c_str(), "rb")), path_(path.string()) {
    if (!file_) throw DataError("cannot open file: " + path_);
  }
  ~GzFile() {
    if (file_) gzclose(file_);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  void read_exact(void* buffer, std::size_t size) {
    const int got = gzread(file_, buffer, static_cast<unsigned>(size));
    if (got < 0 || static_cast<std::size_t>(got) != size)
      throw DataError("truncated or unreadable payload in " + path_);
  }

  std::uint32_t read_be32() {
    std::array<unsigned char, 4> bytes{};
    read_exact(bytes.data(), bytes.size());
    return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
           (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  }

 private:
  gzFile file_;
  std::string path_;
};

void write_be32(std::ofstream& out, std::uint32_t value) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(value >> 24), static_cast<unsigned char>(value >> 16),
      static_cast<unsigned char>(value >> 8), static_cast<unsigned char>(value)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

void ImageBatch::validate() const {
  if (pixels.size() != labels.size() * static_cast<std::size_t>(kImagePixels))
    throw DataError("image batch pixel count does not match label count");
  for (float value : pixels)
    if (!(value >= 0.0f && value <= 1.0f)) throw DataError("image pixel outside [0,1]");
  for (std::uint8_t label : labels)
    if (label >= kNumClasses) throw DataError("label out of range 0..9");
}

Eigen::VectorXd image_as_input(const ImageBatch& batch, std::size_t index) {
  Eigen::VectorXd input(kImagePixels);
  const float* pixels = batch.image(index);
  for (int i = 0; i < kImagePixels; ++i) input[i] = static_cast<double>(pixels[i]);
  return input;
}

std::uint64_t compute_order_digest(const ImageBatch& batch) {
  Digest64 digest;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    digest.update_value(static_cast<std::uint32_t>(i));
    digest.update_value(batch.labels[i]);
  }
  return digest.value();
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, const std::string& split) {
  GzFile images_file(images_path);
  const std::uint32_t images_magic = images_file.read_be32();
  if (images_magic != kImagesMagic)
    throw DataError("bad IDX magic in " + images_path.string() + " (expected images file)");
  const std::uint32_t n_images = images_file.read_be32();
  const std::uint32_t rows = images_file.read_be32();
  const std::uint32_t cols = images_file.read_be32();
  if (rows != kImageSide || cols != kImageSide)
    throw DataError("unsupported IDX image shape " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " (expected 28x28)");

  GzFile labels_file(labels_path);
  const std::uint32_t labels_magic = labels_file.read_be32();
  if (labels_magic != kLabelsMagic)
    throw DataError("bad IDX magic in " + labels_path.string() + " (expected labels file)");
  const std::uint32_t n_labels = labels_file.read_be32();
  if (n_images != n_labels)
    throw DataError("IDX image/label count mismatch: " + std::to_string(n_images) + " vs " +
                    std::to_string(n_labels));

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(n_images) * kImagePixels);
  images_file.read_exact(raw.data(), raw.size());

  Dataset dataset;
  dataset.split = split;
  dataset.images.labels.resize(n_labels);
  labels_file.read_exact(dataset.images.labels.data(), n_labels);

  dataset.images.pixels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    dataset.images.pixels[i] = static_cast<float>(raw[i]) / 255.0f;
  dataset.images.provenance = "clean";
  dataset.images.validate();
  dataset.order_digest = compute_order_digest(dataset.images);
  return dataset;
}

void save_idx(const ImageBatch& batch, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
  std::ofstream images(images_path, std::ios::binary);
  if (!images) throw DataError("cannot write " + images_path.string());
  write_be32(images, kImagesMagic);
  write_be32(images, static_cast<std::uint32_t>(batch.size()));
  write_be32(images, kImageSide);
  write_be32(images, kImageSide);
  std::vector<std::uint8_t> raw(batch.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = static_cast<std::uint8_t>(std::lround(batch.pixels[i] * 255.0f));
  images.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));

  std::ofstream labels(labels_path, std::ios::binary);
  if (!labels) throw DataError("cannot write " + labels_path.string());
  write_be32(labels, kLabelsMagic);
  write_be32(labels, static_cast<std::uint32_t>(batch.size()));
  labels.write(reinterpret_cast<const char*>(batch.labels.data()),
               static_cast<std::streamsize>(batch.labels.size()));
  if (!images || !labels) throw DataError("failed writing IDX pair");
}

bool looks_like_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  char magic[6] = {};
  in.read(magic, 6);
  return in && magic[0] == '\x93' && magic[1] == 'N' && magic[2] == 'U' && magic[3] == 'M' &&
         magic[4] == 'P' && magic[5] == 'Y';
}

ImageBatch load_npy_batch(const std::filesystem::path& images_path,
                          const std::vector<std::uint8_t>& labels) {
  const NpyArray array = load_npy_u8(images_path);
  if (array.shape.size() != 3 || array.shape[1] != kImageSide || array.shape[2] != kImageSide)
    throw DataError("npy batch " + images_path.string() + " must have shape (n,28,28)");
  const std::uint64_t n = array.shape[0];
  if (!labels.empty() && n != labels.size())
    throw DataError("npy batch " + images_path.string() + " has " + std::to_string(n) +
                    " images but " + std::to_string(labels.size()) + " labels were provided");

  Digest64 digest;
  digest.update(array.data.data(), array.data.size());

  ImageBatch batch;
  batch.labels = labels.empty() ? std::vector<std::uint8_t>(n, 0) : labels;
  batch.pixels.resize(array.data.size());
  for (std::size_t p = 0; p < array.data.size(); ++p)
    batch.pixels[p] = static_cast<float>(array.data[p]) / 255.0f;
  batch.provenance = "file:" + format_digest(digest.value());
  batch.validate();
  return batch;
}

void save_npy_batch(const ImageBatch& batch, const std::filesystem::path& images_path) {
  std::vector<std::uint8_t> raw(batch.pixels.size());
  for (std::size_t p = 0; p < raw.size(); ++p) {
    const float clamped = std::min(1.0f, std::max(0.0f, batch.pixels[p]));
    raw[p] = static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
  }
  save_npy_u8(images_path, {batch.size(), kImageSide, kImageSide}, raw);
}

void save_npy_labels(const std::vector<std::uint8_t>& labels,
                     const std::filesystem::path& path) {
  save_npy_u8(path, {labels.size()}, labels);
}

std::vector<std::uint8_t> load_labels_file(const std::filesystem::path& path) {
  if (looks_like_npy(path)) {
    const NpyArray array = load_npy_u8(path);
    if (array.shape.size() != 1)
      throw DataError("npy label file " + path.string() + " must have shape (n,)");
    return array.data;
  }
  GzFile file(path);
  if (file.read_be32() != kLabelsMagic)
    throw DataError("bad IDX magic in " + path.string() + " (expected labels file)");
  std::vector<std::uint8_t> labels(file.read_be32());
  file.read_exact(labels.data(), labels.size());
  return labels;
}

ImageBatch load_images_file(const std::filesystem::path& path) {
  if (looks_like_npy(path)) return load_npy_batch(path, {});
  GzFile file(path);
  if (file.read_be32() != kImagesMagic)
    throw DataError("bad IDX magic in " + path.string() + " (expected images file)");
  const std::uint32_t n = file.read_be32();
  const std::uint32_t rows = file.read_be32();
  const std::uint32_t cols = file.read_be32();
  if (rows != kImageSide || cols != kImageSide)
    throw DataError("unsupported IDX image shape in " + path.string());
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(n) * kImagePixels);
  file.read_exact(raw.data(), raw.size());
  ImageBatch batch;
  batch.labels.assign(n, 0);
  batch.pixels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    batch.pixels[i] = static_cast<float>(raw[i]) / 255.0f;
  return batch;
}

Dataset load_dataset(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path, const std::string& split) {
  if (!looks_like_npy(images_path) && !looks_like_npy(labels_path))
    return load_idx(images_path, labels_path, split);
  const std::vector<std::uint8_t> labels = load_labels_file(labels_path);
  ImageBatch images;
  if (looks_like_npy(images_path)) {
    images = load_npy_batch(images_path, labels);
  } else {
    images = load_images_file(images_path);
    if (images.size() != labels.size())
      throw DataError("image/label count mismatch between " + images_path.string() + " and " +
                      labels_path.string());
    images.labels = labels;
  }
  images.validate();
  Dataset dataset;
  dataset.split = split;
  dataset.images = std::move(images);
  dataset.order_digest = compute_order_digest(dataset.images);
  return dataset;
}

Dataset subset(const Dataset& dataset, int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) throw ConfigError("n_per_class must be >= 1");

  std::array<std::vector<std::uint32_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[dataset.images.labels[i]].push_back(static_cast<std::uint32_t>(i));

  std::vector<std::uint32_t> selected;
  selected.reserve(static_cast<std::size_t>(n_per_class) * kNumClasses);
  Rng rng(derive_seed(seed, 0x535542534554ULL));
  for (int c = 0; c < kNumClasses; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    if (pool.size() < static_cast<std::size_t>(n_per_class))
      throw DataError("class " + std::to_string(c) + " has only " + std::to_string(pool.size()) +
                      " samples, need " + std::to_string(n_per_class));
    // Partial Fisher-Yates; the chosen indices are re-sorted afterwards so
    // relative order within the class is preserved.
    for (int pick = 0; pick < n_per_class; ++pick) {
      const auto swap_with =
          static_cast<std::size_t>(pick) + rng.below(pool.size() - static_cast<std::size_t>(pick));
      std::swap(pool[static_cast<std::size_t>(pick)], pool[swap_with]);
      selected.push_back(pool[static_cast<std::size_t>(pick)]);
    }
  }
  std::sort(selected.begin(), selected.end());

  Dataset out;
  out.split = dataset.split;
  out.images.provenance = dataset.images.provenance;
  out.images.labels.reserve(selected.size());
  out.images.pixels.reserve(selected.size() * kImagePixels);
  for (std::uint32_t index : selected) {
    out.images.labels.push_back(dataset.images.labels[index]);
    const float* src = dataset.images.image(index);
    out.images.pixels.insert(out.images.pixels.end(), src, src + kImagePixels);
  }
  out.order_digest = compute_order_digest(out.images);
  return out;
}

}  // namespace recap

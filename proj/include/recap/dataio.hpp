#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "recap/image.hpp"

namespace recap {

// Labeled dataset with a pinned ordering. Prototype updates are order
// dependent, so the digest of the (index, label) sequence is recorded in
// model files to make training replays exact.
struct Dataset {
  ImageBatch images;
  std::string split = "train";  // "train" | "test"
  std::uint64_t order_digest = 0;

  std::size_t size() const noexcept { return images.size(); }
};

std::uint64_t compute_order_digest(const ImageBatch& batch);

// Reads an IDX image/label pair (big-endian, magic 0x00000803 / 0x00000801).
// Plain and gzip-compressed files are both accepted. Pixels are scaled to
// [0,1] by /255; file order is preserved.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, const std::string& split = "train");

// Writes an IDX pair (uncompressed); pixels are rounded back to bytes.
void save_idx(const ImageBatch& batch, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

// Deterministic stratified subsample: n_per_class images per class, chosen by
// the seeded generator, preserving relative order within each class (indices
// stay ascending). Throws DataError when a class is short.
Dataset subset(const Dataset& dataset, int n_per_class, std::uint64_t seed);

bool looks_like_npy(const std::filesystem::path& path);

// NPY batch layout shared with the MNIST-C distribution: u8 images of shape
// (n,28,28); labels as a companion (n,) array. The loader validates shape and
// label alignment and tags the batch with a digest of the raw payload.
ImageBatch load_npy_batch(const std::filesystem::path& images_path,
                          const std::vector<std::uint8_t>& labels);
void save_npy_batch(const ImageBatch& batch, const std::filesystem::path& images_path);
void save_npy_labels(const std::vector<std::uint8_t>& labels,
                     const std::filesystem::path& path);

// Format-sniffing loaders (IDX or NPY by magic). Images loaded without a
// label file get all-zero labels.
std::vector<std::uint8_t> load_labels_file(const std::filesystem::path& path);
ImageBatch load_images_file(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path, const std::string& split);

}  // namespace recap

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace recap {

// Minimal NPY support for the MNIST-C batch layout: version 1.0, C order,
// unsigned 8-bit payloads. Images are shape (n, 28, 28); labels are (n,).
// Label files written by numpy as little-endian int64 are also accepted.

struct NpyArray {
  std::vector<std::uint64_t> shape;
  std::vector<std::uint8_t> data;  // u8 payload (i8/i64 inputs are narrowed after range check)
};

NpyArray load_npy_u8(const std::filesystem::path& path);
void save_npy_u8(const std::filesystem::path& path, const std::vector<std::uint64_t>& shape,
                 const std::vector<std::uint8_t>& data);

}  // namespace recap

#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "recap/errors.hpp"

namespace recap {

// Square binary matrix with rows packed into 64-bit words, row-major.
// Backing store for co-activation masks and binary prototypes. Padding bits
// past column n are kept at zero so whole-word popcounts are exact.
class SquareBitMatrix {
 public:
  SquareBitMatrix() = default;

  explicit SquareBitMatrix(std::uint32_t n)
      : n_(n), words_per_row_((n + 63) / 64), words_(std::size_t{n} * words_per_row_, 0) {}

  std::uint32_t size() const noexcept { return n_; }
  std::uint32_t words_per_row() const noexcept { return words_per_row_; }

  bool test(std::uint32_t i, std::uint32_t j) const noexcept {
    return (row_ptr(i)[j >> 6] >> (j & 63)) & 1u;
  }

  void set(std::uint32_t i, std::uint32_t j) noexcept {
    row_ptr(i)[j >> 6] |= std::uint64_t{1} << (j & 63);
  }

  void clear(std::uint32_t i, std::uint32_t j) noexcept {
    row_ptr(i)[j >> 6] &= ~(std::uint64_t{1} << (j & 63));
  }

  std::span<const std::uint64_t> row(std::uint32_t i) const noexcept {
    return {row_ptr(i), words_per_row_};
  }

  std::span<std::uint64_t> row(std::uint32_t i) noexcept { return {row_ptr(i), words_per_row_}; }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  std::uint64_t popcount() const noexcept {
    std::uint64_t total = 0;
    for (std::uint64_t word : words_) total += static_cast<std::uint64_t>(std::popcount(word));
    return total;
  }

  std::uint64_t row_popcount(std::uint32_t i) const noexcept {
    std::uint64_t total = 0;
    for (std::uint64_t word : row(i)) total += static_cast<std::uint64_t>(std::popcount(word));
    return total;
  }

  // Frobenius inner product of two binary matrices: AND then popcount.
  static std::uint64_t overlap(const SquareBitMatrix& a, const SquareBitMatrix& b) {
    if (a.n_ != b.n_) throw DataError("bit matrix size mismatch in overlap");
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < a.words_.size(); ++w)
      total += static_cast<std::uint64_t>(std::popcount(a.words_[w] & b.words_[w]));
    return total;
  }

  bool operator==(const SquareBitMatrix&) const = default;

 private:
  const std::uint64_t* row_ptr(std::uint32_t i) const noexcept {
    return words_.data() + std::size_t{i} * words_per_row_;
  }
  std::uint64_t* row_ptr(std::uint32_t i) noexcept {
    return words_.data() + std::size_t{i} * words_per_row_;
  }

  std::uint32_t n_ = 0;
  std::uint32_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace recap

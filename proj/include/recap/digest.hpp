#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace recap {

// FNV-1a, used for config/dataset/order digests and the model container
// checksum. Not cryptographic; it only has to pin byte content for replay.
class Digest64 {
 public:
  Digest64& update(const void* data, std::size_t size) noexcept {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  Digest64& update(std::string_view text) noexcept { return update(text.data(), text.size()); }

  template <typename T>
  Digest64& update_value(const T& value) noexcept {
    static_assert(std::is_trivially_copyable_v<T>);
    return update(&value, sizeof(T));
  }

  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string format_digest(std::uint64_t digest);

}  // namespace recap

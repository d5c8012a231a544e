#include "recap/digest.hpp"

#include <cstdio>

namespace recap {

std::string format_digest(std::uint64_t digest) {
  char buffer[19];
  std::snprintf(buffer, sizeof(buffer), "0x%016llx", static_cast<unsigned long long>(digest));
  return buffer;
}

}  // namespace recap

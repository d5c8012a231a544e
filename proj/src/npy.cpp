#include "recap/npy.hpp"

#include <cstring>
#include <fstream>
#include <string>

#include "recap/errors.hpp"

namespace recap {
namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string shape_tuple(const std::vector<std::uint64_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out += std::to_string(shape[i]);
    if (i + 1 < shape.size() || shape.size() == 1) out += ",";
    if (i + 1 < shape.size()) out += " ";
  }
  out += ")";
  return out;
}

// Pulls the quoted/parenthesized value for `key` out of the header dict.
// The header is machine-written with a tiny grammar; no general parser needed.
std::string header_field(const std::string& header, const std::string& key) {
  const auto key_pos = header.find("'" + key + "'");
  if (key_pos == std::string::npos) throw DataError("npy header missing key '" + key + "'");
  auto pos = header.find(':', key_pos);
  if (pos == std::string::npos) throw DataError("npy header malformed at key '" + key + "'");
  ++pos;
  while (pos < header.size() && header[pos] == ' ') ++pos;
  if (pos >= header.size()) throw DataError("npy header truncated");
  if (header[pos] == '\'') {
    const auto end = header.find('\'', pos + 1);
    if (end == std::string::npos) throw DataError("npy header unterminated string");
    return header.substr(pos + 1, end - pos - 1);
  }
  if (header[pos] == '(') {
    const auto end = header.find(')', pos);
    if (end == std::string::npos) throw DataError("npy header unterminated tuple");
    return header.substr(pos, end - pos + 1);
  }
  auto end = header.find_first_of(",}", pos);
  if (end == std::string::npos) end = header.size();
  return header.substr(pos, end - pos);
}

std::vector<std::uint64_t> parse_shape(const std::string& tuple) {
  std::vector<std::uint64_t> shape;
  std::string digits;
  for (char c : tuple) {
    if (c >= '0' && c <= '9') {
      digits += c;
    } else if (!digits.empty()) {
      shape.push_back(std::stoull(digits));
      digits.clear();
    }
  }
  if (!digits.empty()) shape.push_back(std::stoull(digits));
  return shape;
}

}  // namespace

NpyArray load_npy_u8(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open npy file: " + path.string());

  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0)
    throw DataError("bad npy magic in " + path.string());

  unsigned char version[2];
  in.read(reinterpret_cast<char*>(version), 2);
  if (!in || version[0] < 1 || version[0] > 2)
    throw DataError("unsupported npy version in " + path.string());

  std::uint32_t header_len = 0;
  if (version[0] == 1) {
    unsigned char len_bytes[2];
    in.read(reinterpret_cast<char*>(len_bytes), 2);
    header_len = len_bytes[0] | (std::uint32_t{len_bytes[1]} << 8);
  } else {
    unsigned char len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    header_len = len_bytes[0] | (std::uint32_t{len_bytes[1]} << 8) |
                 (std::uint32_t{len_bytes[2]} << 16) | (std::uint32_t{len_bytes[3]} << 24);
  }
  if (!in) throw DataError("truncated npy header in " + path.string());

  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in) throw DataError("truncated npy header in " + path.string());

  const std::string descr = header_field(header, "descr");
  const std::string order = header_field(header, "fortran_order");
  if (order.find("False") == std::string::npos)
    throw DataError("fortran-order npy arrays are not supported: " + path.string());

  NpyArray array;
  array.shape = parse_shape(header_field(header, "shape"));
  std::uint64_t count = 1;
  for (std::uint64_t dim : array.shape) count *= dim;

  if (descr == "|u1" || descr == "u1" || descr == "|i1") {
    array.data.resize(count);
    in.read(reinterpret_cast<char*>(array.data.data()), static_cast<std::streamsize>(count));
    if (!in) throw DataError("truncated npy payload in " + path.string());
  } else if (descr == "<i8" || descr == "<u8") {
    std::vector<unsigned char> raw(count * 8);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) throw DataError("truncated npy payload in " + path.string());
    array.data.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint64_t value = 0;
      for (int b = 7; b >= 0; --b) value = (value << 8) | raw[i * 8 + static_cast<unsigned>(b)];
      if (value > 255) throw DataError("npy int64 value out of byte range in " + path.string());
      array.data[i] = static_cast<std::uint8_t>(value);
    }
  } else {
    throw DataError("unsupported npy dtype '" + descr + "' in " + path.string());
  }
  return array;
}

void save_npy_u8(const std::filesystem::path& path, const std::vector<std::uint64_t>& shape,
                 const std::vector<std::uint8_t>& data) {
  std::uint64_t count = 1;
  for (std::uint64_t dim : shape) count *= dim;
  if (count != data.size()) throw DataError("npy shape does not match payload size");

  std::string dict =
      "{'descr': '|u1', 'fortran_order': False, 'shape': " + shape_tuple(shape) + ", }";
  // Pad with spaces so magic+version+len+header is a multiple of 64 bytes.
  const std::size_t unpadded = 6 + 2 + 2 + dict.size() + 1;
  const std::size_t padding = (64 - unpadded % 64) % 64;
  dict.append(padding, ' ');
  dict += '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write npy file: " + path.string());
  out.write(kMagic, 6);
  const unsigned char version[2] = {1, 0};
  out.write(reinterpret_cast<const char*>(version), 2);
  const auto header_len = static_cast<std::uint16_t>(dict.size());
  const unsigned char len_bytes[2] = {static_cast<unsigned char>(header_len & 0xff),
                                      static_cast<unsigned char>(header_len >> 8)};
  out.write(reinterpret_cast<const char*>(len_bytes), 2);
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("failed writing npy file: " + path.string());
}

}  // namespace recap

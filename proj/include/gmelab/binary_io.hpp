#pragma once
// Little-endian primitive encoding for the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "gmelab/errors.hpp"

namespace gmelab::io {

template <class U>
void put_le(std::ostream& out, U v) {
  static_assert(std::is_unsigned_v<U>);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, sizeof(U));
}

inline void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <class U>
U get_le(std::istream& in, std::string_view what) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) {
    throw FormatError("truncated input while reading " + std::string(what));
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, what));
}

inline void put_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), 4); }

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buf[4] = {0, 0, 0, 0};
  if (!in.read(buf, 4)) throw FormatError("missing header: expected magic '" + std::string(magic) + "'");
  if (std::memcmp(buf, magic.data(), 4) != 0) {
    throw FormatError("bad magic: expected '" + std::string(magic) + "'");
  }
}

}  // namespace gmelab::io

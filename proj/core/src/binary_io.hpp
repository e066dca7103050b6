#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "affectfuse/error.hpp"

namespace affectfuse::detail {

// Little-endian primitive encoding shared by the EMB1, FMAT1 and MLP1 formats.

template <typename UInt>
void put_uint(std::ostream& out, UInt value) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof bytes);
}

inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_short_string(std::ostream& out, std::string_view s) {
  if (s.size() > 0xFFFF) throw FormatError("id longer than 65535 bytes");
  put_uint(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, std::string_view what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError("truncated input while reading " + std::string(what));
  }
}

template <typename UInt>
UInt get_uint(std::istream& in, std::string_view what) {
  unsigned char bytes[sizeof(UInt)];
  read_exact(in, reinterpret_cast<char*>(bytes), sizeof bytes, what);
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= static_cast<UInt>(bytes[i]) << (8 * i);
  return value;
}

inline float get_f32(std::istream& in, std::string_view what) {
  return std::bit_cast<float>(get_uint<std::uint32_t>(in, what));
}
inline double get_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(get_uint<std::uint64_t>(in, what));
}

inline std::string get_short_string(std::istream& in, std::string_view what) {
  const auto n = get_uint<std::uint16_t>(in, what);
  std::string s(n, '\0');
  if (n > 0) read_exact(in, s.data(), n, what);
  return s;
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(magic.size()));
  if (static_cast<std::size_t>(in.gcount()) != magic.size() || got != magic) {
    throw FormatError("bad magic: expected '" + std::string(magic) + "'");
  }
}

inline void expect_eof(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
}

}  // namespace affectfuse::detail

#pragma once

// Little-endian primitive I/O shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "kgc/error.hpp"

namespace kgc::io {

template <typename UInt>
void write_le(std::ostream& out, UInt v) {
  unsigned char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(UInt));
}

template <typename UInt>
UInt read_le(std::istream& in, const char* what) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt)))
    throw FormatError(std::string("unexpected end of file reading ") + what);
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline void write_f32(std::ostream& out, float f) { write_le(out, std::bit_cast<std::uint32_t>(f)); }

inline float read_f32(std::istream& in, const char* what) {
  return std::bit_cast<float>(read_le<std::uint32_t>(in, what));
}

inline void write_magic(std::ostream& out, const char (&magic)[4]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[4], const std::string& file) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0)
    throw FormatError(file + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
}

}  // namespace kgc::io

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "core/error.hpp"

namespace mmt {

// Byte-order helpers for the binary file payloads. Everything on disk is
// little-endian except PGM samples, which Netpbm defines as big-endian.

inline uint16_t bytes_to_u16_le(const unsigned char* b) {
  return uint16_t(b[0] | (uint16_t(b[1]) << 8));
}
inline uint32_t bytes_to_u32_le(const unsigned char* b) {
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}
inline uint64_t bytes_to_u64_le(const unsigned char* b) {
  return uint64_t(bytes_to_u32_le(b)) | (uint64_t(bytes_to_u32_le(b + 4)) << 32);
}
inline uint16_t bytes_to_u16_be(const unsigned char* b) {
  return uint16_t((uint16_t(b[0]) << 8) | b[1]);
}

inline void u16_to_bytes_le(uint16_t v, unsigned char* b) {
  b[0] = (unsigned char)(v & 0xff);
  b[1] = (unsigned char)(v >> 8);
}
inline void u32_to_bytes_le(uint32_t v, unsigned char* b) {
  b[0] = (unsigned char)(v & 0xff);
  b[1] = (unsigned char)((v >> 8) & 0xff);
  b[2] = (unsigned char)((v >> 16) & 0xff);
  b[3] = (unsigned char)((v >> 24) & 0xff);
}
inline void u64_to_bytes_le(uint64_t v, unsigned char* b) {
  u32_to_bytes_le(uint32_t(v & 0xffffffffu), b);
  u32_to_bytes_le(uint32_t(v >> 32), b + 4);
}
inline void u16_to_bytes_be(uint16_t v, unsigned char* b) {
  b[0] = (unsigned char)(v >> 8);
  b[1] = (unsigned char)(v & 0xff);
}

inline float bytes_to_f32_le(const unsigned char* b) {
  return std::bit_cast<float>(bytes_to_u32_le(b));
}
inline double bytes_to_f64_le(const unsigned char* b) {
  return std::bit_cast<double>(bytes_to_u64_le(b));
}
inline void f32_to_bytes_le(float v, unsigned char* b) {
  u32_to_bytes_le(std::bit_cast<uint32_t>(v), b);
}
inline void f64_to_bytes_le(double v, unsigned char* b) {
  u64_to_bytes_le(std::bit_cast<uint64_t>(v), b);
}

inline void read_exact(std::istream& in, void* dst, size_t bytes, const std::string& what) {
  in.read(static_cast<char*>(dst), std::streamsize(bytes));
  if (size_t(in.gcount()) != bytes)
    throw Error(ErrorCode::Io, "truncated read of " + std::to_string(bytes) + " bytes (" + what +
                                   "), got " + std::to_string(in.gcount()));
}

inline void write_exact(std::ostream& out, const void* src, size_t bytes,
                        const std::string& what) {
  out.write(static_cast<const char*>(src), std::streamsize(bytes));
  if (!out) throw Error(ErrorCode::Io, "write failed (" + what + ")");
}

}  // namespace mmt

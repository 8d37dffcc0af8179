// Copyright 2026 rtube contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace rtube {

inline void write_le_u64(std::ostream& os, std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  char buf[8];
  std::memcpy(buf, &v, 8);
  os.write(buf, 8);
}

inline void write_le_f64(std::ostream& os, double v) { write_le_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline bool read_le_u64(std::istream& is, std::uint64_t& v) {
  char buf[8];
  if (!is.read(buf, 8)) return false;
  std::memcpy(&v, buf, 8);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return true;
}

inline bool read_le_f64(std::istream& is, double& v) {
  std::uint64_t u = 0;
  if (!read_le_u64(is, u)) return false;
  v = std::bit_cast<double>(u);
  return true;
}

}  // namespace rtube

#pragma once

#include <array>
#include <charconv>
#include <string>

namespace xcorr::detail {

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace xcorr::detail

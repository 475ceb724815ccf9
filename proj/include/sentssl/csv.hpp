#pragma once

#include <charconv>
#include <cstddef>
#include <string>

namespace sentssl {

/// Shortest round-trip decimal form ("0.25", "1e-05"). Locale independent.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace sentssl

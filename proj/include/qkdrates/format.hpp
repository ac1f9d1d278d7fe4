#pragma once

// Locale-independent number formatting for CSV/JSON output.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>

namespace qkdrates {

/// Shortest round-trip representation with a '.' decimal separator; "nan", "inf", "-inf"
/// for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

/// Fixed number of significant digits, still locale-independent.
inline std::string format_double(double v, int precision) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

}  // namespace qkdrates

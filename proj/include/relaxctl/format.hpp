// Number formatting for reports and CSV emission.
#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace relaxctl {

// Shortest decimal representation that round-trips the double exactly
// (never more than 17 significant digits). Used for all CSV output.
inline std::string format_roundtrip(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Fixed 7 decimals, for human-readable report lines.
inline std::string format_fixed7(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7f", x);
  std::string out = buf;
  if (out == "-0.0000000") out = "0.0000000";  // hide the sign of numeric zero
  return out;
}

// 7 significant digits, for small-magnitude diagnostics.
inline std::string format_sig7(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7g", x);
  return buf;
}

}  // namespace relaxctl

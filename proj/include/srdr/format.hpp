#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>

namespace srdr {

// 17 significant digits: enough that parsing the text recovers the exact
// 64-bit value, so every file format round-trips bit-exactly.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Whole-token parses: trailing characters are a failure, unlike strtod.
inline bool parse_double_strict(std::string_view s, double* out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, *out);
  return r.ec == std::errc() && r.ptr == end;
}

inline bool parse_size_strict(std::string_view s, std::size_t* out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, *out);
  return r.ec == std::errc() && r.ptr == end;
}

}  // namespace srdr

#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "pml/errors.hpp"

namespace pml {

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

inline double parse_double(const std::string& token, const std::string& context) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(context + ": bad numeric token '" + token + "'");
  return v;
}

inline std::uint64_t parse_u64(const std::string& token, const std::string& context) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(context + ": bad unsigned integer '" + token + "'");
  return v;
}

inline long long parse_i64(const std::string& token, const std::string& context) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError(context + ": bad integer '" + token + "'");
  return v;
}

}  // namespace pml

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>

namespace pdcspeckle::text {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s == "inf" || s == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  if (s == "nan") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

template <class Int>
bool parse_integer(std::string_view s, Int& out) {
  s = trim(s);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Fixed significant-digit rendering for tables.
inline std::string format_table(double v, int digits = 10) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, p);
}

/// Parses a decimal given in display units of 10^shift per SI unit. The exponent is shifted
/// in the text, so the SI value is rounded exactly once.
inline bool parse_shifted(std::string_view s, int shift, double& out) {
  s = trim(s);
  if (shift == 0 || s == "inf" || s == "+inf" || s == "nan") return parse_double(s, out);
  const auto e = s.find_first_of("eE");
  int exponent = 0;
  if (e != std::string_view::npos) {
    std::string_view tail = s.substr(e + 1);
    if (!tail.empty() && tail.front() == '+') tail.remove_prefix(1);
    if (!parse_integer(tail, exponent)) return false;
  }
  const std::string_view mantissa = s.substr(0, e);
  if (mantissa.empty() || mantissa.find_first_of("eE") != std::string_view::npos) return false;
  return parse_double(std::string(mantissa) + "e" + std::to_string(exponent - shift), out);
}

/// Shortest display-unit decimal (10^shift per SI unit) that parse_shifted() maps back to
/// exactly `si`.
inline std::string format_shifted(double si, int shift) {
  if (shift == 0 || !std::isfinite(si)) return format_exact(si);
  if (si == 0.0) return "0";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, si, std::chars_format::scientific);
  const std::string sci(buf, p);
  const auto e = sci.find('e');
  std::string digits = sci.substr(0, e);
  int exponent = 0;
  parse_integer(std::string_view(sci).substr(sci[e + 1] == '+' ? e + 2 : e + 1), exponent);
  exponent += shift;
  std::string sign;
  if (digits.front() == '-') {
    sign = "-";
    digits.erase(0, 1);
  }
  if (const auto dot = digits.find('.'); dot != std::string::npos) digits.erase(dot, 1);
  if (exponent < -6 || exponent > 20) {
    std::string m = digits.substr(0, 1);
    if (digits.size() > 1) m += "." + digits.substr(1);
    return sign + m + "e" + std::to_string(exponent);
  }
  // digits d0 d1 ... with the decimal point after position exponent + 1.
  const int point = exponent + 1;
  std::string out;
  if (point <= 0) {
    out = "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
  } else if (static_cast<std::size_t>(point) >= digits.size()) {
    out = digits + std::string(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    out = digits.substr(0, static_cast<std::size_t>(point)) + "." + digits.substr(static_cast<std::size_t>(point));
  }
  return sign + out;
}

}  // namespace pdcspeckle::text

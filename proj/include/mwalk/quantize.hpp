#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <system_error>

namespace mwalk {

namespace detail {

// Decimal digits and exponent of a positive finite double printed with
// `precision` digits after the leading one. The digits are not terminated.
struct Scientific {
  std::array<char, 832> digits;
  std::size_t count = 0;
  int exponent = 0;
};

inline void to_scientific(double mag, int precision, Scientific& out) {
  std::array<char, 840> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), mag,
                                 std::chars_format::scientific, precision);
  if (ec != std::errc{}) throw std::runtime_error("quantize: to_chars failed");
  const char* p = buf.data();
  out.count = 0;
  out.digits[out.count++] = *p++;
  if (*p == '.') ++p;
  while (*p != 'e') out.digits[out.count++] = *p++;
  ++p;
  out.exponent = 0;
  std::from_chars(*p == '+' ? p + 1 : p, end, out.exponent);
}

// n * 10^e, correctly rounded. Exact inputs give a correctly rounded product
// when n < 2^53 and |e| <= 22; anything else goes through the decimal parser.
inline double scale_decimal(std::uint64_t n, int e) {
  static constexpr double kPow10[] = {1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,
                                      1e8,  1e9,  1e10, 1e11, 1e12, 1e13, 1e14, 1e15,
                                      1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};
  if (n <= (std::uint64_t{1} << 53) && e >= -22 && e <= 22) {
    const double x = static_cast<double>(n);
    return e >= 0 ? x * kPow10[e] : x / kPow10[-e];
  }
  std::string text = std::to_string(n) + 'e' + std::to_string(e);
  double out = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec == std::errc::result_out_of_range) out = e > 0 ? HUGE_VAL : 0.0;
  return out;
}

}  // namespace detail

namespace detail {

// Keeps the first `d` of `digits` (scientific, leading digit at `exponent`),
// adds one in the last place when `up`, and returns the nearest double.
inline double round_prefix(const char* digits, std::size_t d, int exponent, bool up) {
  std::array<char, 17> kept{};
  std::copy_n(digits, d, kept.begin());
  if (up) {
    std::size_t pos = d;
    while (pos > 0 && kept[pos - 1] == '9') kept[--pos] = '0';
    if (pos == 0) {
      kept[0] = '1';
      ++exponent;
    } else {
      ++kept[pos - 1];
    }
  }

  std::uint64_t n = 0;
  for (std::size_t i = 0; i < d; ++i) n = n * 10 + static_cast<std::uint64_t>(kept[i] - '0');
  return scale_decimal(n, exponent - static_cast<int>(d) + 1);
}

// Reference rounding of a positive finite double from its full expansion.
inline double quantize_exact(double mag, std::size_t d) {
  Scientific sci;
  to_scientific(mag, 800, sci);
  return round_prefix(sci.digits.data(), d, sci.exponent, sci.digits[d] >= '5');
}

// Rounding from a (d+2)-digit print. The print decides unless the digits after
// the rounding digit are all zero, since it may itself have carried. Even then
// a carry only matters when the rounding digit shows '5' (a 4999.. below it
// rounds down). The parsed midpoint settles that unless it lands on `mag`.
inline double quantize_printed(double mag, std::size_t d) {
  Scientific sci;
  to_scientific(mag, static_cast<int>(d) + 2, sci);
  bool tail_zero = true;
  for (std::size_t i = d + 1; i < sci.count && tail_zero; ++i) tail_zero = sci.digits[i] == '0';
  if (tail_zero && sci.digits[d] == '5') {
    std::array<char, 32> mid{};
    std::copy_n(sci.digits.begin(), d + 1, mid.begin());
    mid[d + 1] = 'e';
    const auto end = std::to_chars(mid.data() + d + 2, mid.data() + mid.size(),
                                   sci.exponent - static_cast<int>(d)).ptr;
    double m = 0.0;
    std::from_chars(mid.data(), end, m);
    if (mag == m) return quantize_exact(mag, d);
    if (mag < m) sci.digits[d] = '4';
  }
  return round_prefix(sci.digits.data(), d, sci.exponent, sci.digits[d] >= '5');
}

}  // namespace detail

/// Rounds `v` to `digits` significant decimal digits, half away from zero,
/// decided on the exact decimal expansion of the double. Non-finite values
/// and zero are returned unchanged.
inline double quantize(double v, int digits) {
  if (digits < 1) throw std::invalid_argument("quantize: digits must be >= 1");
  if (!std::isfinite(v) || v == 0.0) return v;
  // 17 significant digits always round-trip a double.
  if (digits >= 17) return v;

  const double mag = std::fabs(v);
  const auto d = static_cast<std::size_t>(digits);
  if (d > 15 || mag < std::numeric_limits<double>::min()) {
    const double out = detail::quantize_printed(mag, d);
    return v < 0 ? -out : out;
  }

  // The shortest round-trip digits D lie in the same rounding interval as
  // mag. With at most d of them, mag is already the nearest double to a
  // d-digit decimal and half a unit in the d-th place is far wider than an ulp.
  detail::Scientific sci;
  {
    std::array<char, 40> buf;
    const auto end = std::to_chars(buf.data(), buf.data() + buf.size(), mag,
                                   std::chars_format::scientific).ptr;
    const char* p = buf.data();
    sci.digits[sci.count++] = *p++;
    if (*p == '.') ++p;
    while (*p != 'e') sci.digits[sci.count++] = *p++;
    ++p;
    std::from_chars(*p == '+' ? p + 1 : p, end, sci.exponent);
  }
  if (sci.count <= d) return v;

  // D against the midpoint M = prefix.5: both are decimals, so compare the
  // tails as integers. mag sits on the same side as D unless M is within two
  // ulps of D; those cases go the slow way.
  std::int64_t tail = 0, half = 5;
  for (std::size_t i = d; i < sci.count; ++i) tail = tail * 10 + (sci.digits[i] - '0');
  for (std::size_t i = d + 1; i < sci.count; ++i) half *= 10;
  const std::int64_t gap = tail > half ? tail - half : half - tail;
  // ulp(mag) < 2^-52 * 10^(exponent + 1) and the gap is in units of
  // 10^(exponent - count + 1)
  static constexpr double kPow10[] = {1e0, 1e1, 1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8, 1e9,
                                      1e10, 1e11, 1e12, 1e13, 1e14, 1e15, 1e16, 1e17};
  if (static_cast<double>(gap) <= 4.0 * 0x1p-52 * kPow10[sci.count]) {
    const double out = detail::quantize_printed(mag, d);
    return v < 0 ? -out : out;
  }
  const double out = detail::round_prefix(sci.digits.data(), d, sci.exponent, tail > half);
  return v < 0 ? -out : out;
}

}  // namespace mwalk

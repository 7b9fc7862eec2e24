#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace commitgauge {

using Rational = boost::rational<std::int64_t>;

/// A score that may be undefined (no rated behaviors).
using MaybeRational = std::optional<Rational>;

/// Fixed-point rendering of an exact rational. Halves round away from
/// zero, so negating a value negates its rendering.
inline std::string to_decimal(const Rational& value, int places) {
  std::int64_t scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;

  const bool negative = value < 0;
  const Rational magnitude = negative ? -value : value;
  // floor(magnitude * scale + 1/2)
  const std::int64_t num = magnitude.numerator();
  const std::int64_t den = magnitude.denominator();
  const std::int64_t scaled = (2 * num * scale + den) / (2 * den);

  std::string digits = std::to_string(scaled);
  if (places > 0) {
    if (static_cast<int>(digits.size()) <= places) {
      digits.insert(0, static_cast<std::size_t>(places + 1 - digits.size()), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(places), 1, '.');
  }
  if (negative && scaled != 0) digits.insert(0, 1, '-');
  return digits;
}

/// Signed variant used for deltas: "+50.0", "-12.5", "0.0".
inline std::string to_signed_decimal(const Rational& value, int places) {
  std::string text = to_decimal(value, places);
  if (value > 0 && text.find_first_not_of("0.") != std::string::npos) {
    text.insert(0, 1, '+');
  }
  return text;
}

inline double to_double(const Rational& value) {
  return boost::rational_cast<double>(value);
}

}  // namespace commitgauge

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace isozero {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "-12", "3.25", "1e-3", "-4.5E+2" or "p/q" exactly.
Rational parseRational(std::string_view text);

/// Shortest exact text form. Rationals whose reduced denominator is 2^a 5^b
/// print as plain decimals; anything else prints as "p/q". parseRational
/// inverts this exactly.
std::string formatRational(const Rational& value);

/// Exact rational value of a finite binary double.
Rational rationalFromDouble(double value);

double toDouble(const Rational& value);

}  // namespace isozero

#include "isozero/rational.hpp"

#include "isozero/error.hpp"

#include <cctype>
#include <cmath>

namespace isozero {

const char* toString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ZeroOnSphere: return "ZeroOnSphere";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::NoCertificate: return "NoCertificate";
    case ErrorKind::CycleObstruction: return "CycleObstruction";
    case ErrorKind::InconsistentLift: return "InconsistentLift";
    case ErrorKind::NotConstructive: return "NotConstructive";
    case ErrorKind::RadiusOutOfDomain: return "RadiusOutOfDomain";
    case ErrorKind::EvaluationAtCenter: return "EvaluationAtCenter";
    case ErrorKind::ZeroDetected: return "ZeroDetected";
    case ErrorKind::HomotopyDomainMismatch: return "HomotopyDomainMismatch";
    case ErrorKind::SupNormTooLarge: return "SupNormTooLarge";
    case ErrorKind::DegreeExhausted: return "DegreeExhausted";
    case ErrorKind::ShellBoundViolated: return "ShellBoundViolated";
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorKind::DegreeTooLow: return "DegreeTooLow";
    case ErrorKind::IngredientMismatch: return "IngredientMismatch";
    case ErrorKind::NonIsolatedComplexZero: return "NonIsolatedComplexZero";
    case ErrorKind::EvalTooCloseToBoundary: return "EvalTooCloseToBoundary";
    case ErrorKind::AngleBudgetExceeded: return "AngleBudgetExceeded";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::MultiplierUnderflow: return "MultiplierUnderflow";
    case ErrorKind::ThetaUnbounded: return "ThetaUnbounded";
  }
  return "Unknown";
}

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow10(unsigned e) {
  cpp_int r = 1;
  for (unsigned i = 0; i < e; ++i) r *= 10;
  return r;
}

Rational parseDecimal(std::string_view s) {
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    negative = s[i] == '-';
    ++i;
  }
  cpp_int digits = 0;
  long scale = 0;
  bool any = false;
  bool seenPoint = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (seenPoint) ++scale;
      any = true;
    } else if (c == '.' && !seenPoint) {
      seenPoint = true;
    } else {
      break;
    }
  }
  if (!any) throw Error(ErrorKind::ParseError, "no digits in '" + std::string(s) + "'");
  long exponent = 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool expNeg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      expNeg = s[i] == '-';
      ++i;
    }
    bool expAny = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
      exponent = exponent * 10 + (s[i] - '0');
      expAny = true;
      if (exponent > 100000) throw Error(ErrorKind::ParseError, "exponent too large");
    }
    if (!expAny) throw Error(ErrorKind::ParseError, "bad exponent in '" + std::string(s) + "'");
    if (expNeg) exponent = -exponent;
  }
  if (i != s.size()) throw Error(ErrorKind::ParseError, "trailing characters in '" + std::string(s) + "'");
  const long net = exponent - scale;
  Rational r = net >= 0 ? Rational(digits * pow10(static_cast<unsigned>(net)))
                        : Rational(digits, pow10(static_cast<unsigned>(-net)));
  return negative ? Rational(-r) : r;
}

}  // namespace

Rational parseRational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorKind::ParseError, "empty coefficient");
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    const Rational num = parseDecimal(text.substr(0, slash));
    const Rational den = parseDecimal(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator");
    return num / den;
  }
  return parseDecimal(text);
}

std::string formatRational(const Rational& value) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  cpp_int num = numerator(value);
  cpp_int den = denominator(value);
  cpp_int rest = den;
  unsigned twos = 0, fives = 0;
  while (rest % 2 == 0) { rest /= 2; ++twos; }
  while (rest % 5 == 0) { rest /= 5; ++fives; }
  if (rest != 1) return num.str() + "/" + den.str();
  if (den == 1) return num.str();
  // Scale to a power-of-ten denominator.
  const unsigned digits = std::max(twos, fives);
  cpp_int scaled = num * (pow10(digits) / den);
  const bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.str();
  if (s.size() <= digits) s.insert(0, digits - s.size() + 1, '0');
  s.insert(s.size() - digits, ".");
  return negative ? "-" + s : s;
}

Rational rationalFromDouble(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
  if (value == 0.0) return Rational(0);
  int exp = 0;
  const double mant = std::frexp(value, &exp);
  // mant * 2^53 is an exact integer.
  const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(scaled);
  if (exp >= 0) {
    cpp_int p = 1;
    p <<= exp;
    r *= p;
  } else {
    cpp_int p = 1;
    p <<= -exp;
    r /= p;
  }
  return r;
}

double toDouble(const Rational& value) { return value.convert_to<double>(); }

}  // namespace isozero

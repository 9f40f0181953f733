#pragma once

#include "isozero/rational.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace isozero {

using Vec = std::vector<double>;
using Exponent = std::vector<int>;

/// Sparse multivariate polynomial with exact rational coefficients. Zero
/// coefficients are never stored.
class SparsePolynomial {
 public:
  SparsePolynomial() = default;
  explicit SparsePolynomial(std::size_t numVars);

  static SparsePolynomial constant(std::size_t numVars, const Rational& value);
  static SparsePolynomial variable(std::size_t numVars, std::size_t index);
  /// Builds from (decimal-string, exponent) pairs; handy for literals.
  static SparsePolynomial fromTerms(std::size_t numVars,
                                    const std::vector<std::pair<std::string, Exponent>>& terms);

  std::size_t numVars() const noexcept { return numVars_; }
  const std::map<Exponent, Rational>& terms() const noexcept { return terms_; }
  bool isZero() const noexcept { return terms_.empty(); }
  int totalDegree() const;

  /// Adds `coef * x^exp`, merging with an existing term.
  void addTerm(const Exponent& exp, const Rational& coef);

  SparsePolynomial& operator+=(const SparsePolynomial& other);
  SparsePolynomial& operator-=(const SparsePolynomial& other);
  SparsePolynomial& operator*=(const Rational& scalar);
  friend SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
  friend SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }
  friend SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b);
  friend SparsePolynomial operator*(SparsePolynomial a, const Rational& s) { return a *= s; }
  friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) {
    return a.numVars_ == b.numVars_ && a.terms_ == b.terms_;
  }

  SparsePolynomial pow(int e) const;
  SparsePolynomial derivative(std::size_t var) const;
  /// Replaces x_var by `value` and removes that variable.
  SparsePolynomial substitute(std::size_t var, const Rational& value) const;
  /// Replaces each x_i by x_i + shift_i, expanded exactly.
  SparsePolynomial translate(std::span<const Rational> shift) const;
  /// Drops every term of total degree > degree.
  SparsePolynomial truncate(int degree) const;
  /// Appends `extra` unused variables at the end.
  SparsePolynomial withExtraVariables(std::size_t extra) const;

  /// Plain double evaluation (slow path; PolyMap compiles for speed).
  double evaluate(std::span<const double> x) const;

 private:
  std::size_t numVars_ = 0;
  std::map<Exponent, Rational> terms_;
};

/// Double-precision image of one polynomial laid out for fast repeated
/// evaluation and local Taylor bounds.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const SparsePolynomial& p);

  double evaluate(std::span<const double> x) const;
  std::size_t numTerms() const noexcept { return coefs_.size(); }
  double absCoefSum() const noexcept { return absCoefSum_; }
  int degree() const noexcept { return degree_; }

  /// Value at `center` and a Lipschitz constant valid on the closed ball of
  /// `radius` around it, computed from the exact Taylor re-expansion at the
  /// center (in doubles).
  struct LocalBound {
    double value;
    double lipschitz;
    /// Bound on the rounding error of `value`.
    double roundoff;
  };
  LocalBound localBound(std::span<const double> center, double radius) const;

 private:
  std::size_t numVars_ = 0;
  int degree_ = 0;
  double absCoefSum_ = 0.0;
  std::vector<double> coefs_;
  std::vector<int> exps_;  // numTerms * numVars
  std::vector<int> maxExp_;
};

/// A polynomial map R^n -> R^q.
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(std::size_t n, std::vector<SparsePolynomial> components);

  static PolyMap zero(std::size_t n, std::size_t q);
  static PolyMap identity(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t q() const noexcept { return components_.size(); }
  const SparsePolynomial& component(std::size_t i) const { return components_.at(i); }
  const std::vector<SparsePolynomial>& components() const noexcept { return components_; }
  int degree() const;

  Vec evaluate(std::span<const double> x) const;
  void evaluateInto(std::span<const double> x, std::span<double> out) const;
  /// Row-major q x n Jacobian.
  void jacobianInto(std::span<const double> x, std::span<double> out) const;
  const CompiledPolynomial& compiled(std::size_t i) const { return compiled_.at(i); }

  friend bool operator==(const PolyMap& a, const PolyMap& b) {
    return a.n_ == b.n_ && a.components_ == b.components_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<SparsePolynomial> components_;
  std::vector<CompiledPolynomial> compiled_;
  std::vector<CompiledPolynomial> partials_;  // q * n
};

/// Evaluates map at x; throws DimensionMismatch when sizes differ.
Vec evalPolyMap(const PolyMap& map, std::span<const double> x);

/// L with ||f(x)-f(y)|| <= L ||x-y|| on the ball:
/// sqrt(q) * max_i sum |c| |e| (||center|| + radius)^(|e|-1).
double lipschitzBound(const PolyMap& map, std::span<const double> center, double radius);

/// x -> f(x - tau), expanded exactly.
PolyMap shiftMap(const PolyMap& map, std::span<const Rational> tau);
PolyMap shiftMap(const PolyMap& map, std::span<const double> tau);
/// f + c componentwise.
PolyMap offsetMap(const PolyMap& map, std::span<const Rational> c);
PolyMap offsetMap(const PolyMap& map, std::span<const double> c);
/// Freezes variable `var` at `value` (used for time slices of F(x, t)).
PolyMap substituteVariable(const PolyMap& map, std::size_t var, double value);
/// Appends extra trailing variables that the map ignores.
PolyMap embedMap(const PolyMap& map, std::size_t extraVars);

nlohmann::json toJson(const PolyMap& map);
PolyMap polyMapFromJson(const nlohmann::json& j);

}  // namespace isozero

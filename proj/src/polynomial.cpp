#include "isozero/polynomial.hpp"

#include "isozero/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace isozero {

SparsePolynomial::SparsePolynomial(std::size_t numVars) : numVars_(numVars) {}

SparsePolynomial SparsePolynomial::constant(std::size_t numVars, const Rational& value) {
  SparsePolynomial p(numVars);
  p.addTerm(Exponent(numVars, 0), value);
  return p;
}

SparsePolynomial SparsePolynomial::variable(std::size_t numVars, std::size_t index) {
  if (index >= numVars) throw Error(ErrorKind::DimensionMismatch, "variable index out of range");
  SparsePolynomial p(numVars);
  Exponent e(numVars, 0);
  e[index] = 1;
  p.addTerm(e, Rational(1));
  return p;
}

SparsePolynomial SparsePolynomial::fromTerms(
    std::size_t numVars, const std::vector<std::pair<std::string, Exponent>>& terms) {
  SparsePolynomial p(numVars);
  for (const auto& [coef, exp] : terms) p.addTerm(exp, parseRational(coef));
  return p;
}

int SparsePolynomial::totalDegree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

void SparsePolynomial::addTerm(const Exponent& exp, const Rational& coef) {
  if (exp.size() != numVars_) throw Error(ErrorKind::DimensionMismatch, "exponent length != numVars");
  for (int v : exp)
    if (v < 0) throw Error(ErrorKind::InvalidArgument, "negative exponent");
  if (coef == 0) return;
  auto [it, inserted] = terms_.try_emplace(exp, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0) terms_.erase(it);
  }
}

SparsePolynomial& SparsePolynomial::operator+=(const SparsePolynomial& other) {
  if (other.numVars_ != numVars_) throw Error(ErrorKind::DimensionMismatch, "numVars differ");
  for (const auto& [e, c] : other.terms_) addTerm(e, c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator-=(const SparsePolynomial& other) {
  if (other.numVars_ != numVars_) throw Error(ErrorKind::DimensionMismatch, "numVars differ");
  for (const auto& [e, c] : other.terms_) addTerm(e, -c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator*=(const Rational& scalar) {
  if (scalar == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= scalar;
  return *this;
}

SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
  if (a.numVars_ != b.numVars_) throw Error(ErrorKind::DimensionMismatch, "numVars differ");
  SparsePolynomial r(a.numVars_);
  Exponent e(a.numVars_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r.addTerm(e, ca * cb);
    }
  }
  return r;
}

SparsePolynomial SparsePolynomial::pow(int e) const {
  SparsePolynomial result = constant(numVars_, Rational(1));
  SparsePolynomial base = *this;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

SparsePolynomial SparsePolynomial::derivative(std::size_t var) const {
  if (var >= numVars_) throw Error(ErrorKind::DimensionMismatch, "variable index out of range");
  SparsePolynomial r(numVars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    r.addTerm(d, c * e[var]);
  }
  return r;
}

SparsePolynomial SparsePolynomial::substitute(std::size_t var, const Rational& value) const {
  if (var >= numVars_) throw Error(ErrorKind::DimensionMismatch, "variable index out of range");
  SparsePolynomial r(numVars_ - 1);
  for (const auto& [e, c] : terms_) {
    Exponent d;
    d.reserve(numVars_ - 1);
    for (std::size_t i = 0; i < numVars_; ++i)
      if (i != var) d.push_back(e[i]);
    Rational factor = 1;
    for (int k = 0; k < e[var]; ++k) factor *= value;
    r.addTerm(d, c * factor);
  }
  return r;
}

SparsePolynomial SparsePolynomial::translate(std::span<const Rational> shift) const {
  if (shift.size() != numVars_) throw Error(ErrorKind::DimensionMismatch, "shift length != numVars");
  // Cache (x_i + s_i)^k.
  std::vector<std::vector<SparsePolynomial>> powers(numVars_);
  for (std::size_t i = 0; i < numVars_; ++i) {
    SparsePolynomial lin = variable(numVars_, i) + constant(numVars_, shift[i]);
    powers[i].push_back(constant(numVars_, Rational(1)));
    powers[i].push_back(lin);
  }
  auto power = [&](std::size_t i, int k) -> const SparsePolynomial& {
    while (static_cast<int>(powers[i].size()) <= k) powers[i].push_back(powers[i].back() * powers[i][1]);
    return powers[i][k];
  };
  SparsePolynomial r(numVars_);
  for (const auto& [e, c] : terms_) {
    SparsePolynomial term = constant(numVars_, c);
    for (std::size_t i = 0; i < numVars_; ++i)
      if (e[i] > 0) term = term * power(i, e[i]);
    r += term;
  }
  return r;
}

SparsePolynomial SparsePolynomial::truncate(int degree) const {
  SparsePolynomial r(numVars_);
  for (const auto& [e, c] : terms_)
    if (std::accumulate(e.begin(), e.end(), 0) <= degree) r.addTerm(e, c);
  return r;
}

SparsePolynomial SparsePolynomial::withExtraVariables(std::size_t extra) const {
  SparsePolynomial r(numVars_ + extra);
  for (const auto& [e, c] : terms_) {
    Exponent d = e;
    d.resize(numVars_ + extra, 0);
    r.addTerm(d, c);
  }
  return r;
}

double SparsePolynomial::evaluate(std::span<const double> x) const {
  return CompiledPolynomial(*this).evaluate(x);
}

// ---------------------------------------------------------------------------

CompiledPolynomial::CompiledPolynomial(const SparsePolynomial& p)
    : numVars_(p.numVars()), degree_(p.totalDegree()), maxExp_(p.numVars(), 0) {
  coefs_.reserve(p.terms().size());
  exps_.reserve(p.terms().size() * numVars_);
  for (const auto& [e, c] : p.terms()) {
    const double v = toDouble(c);
    coefs_.push_back(v);
    absCoefSum_ += std::abs(v);
    for (std::size_t i = 0; i < numVars_; ++i) {
      exps_.push_back(e[i]);
      maxExp_[i] = std::max(maxExp_[i], e[i]);
    }
  }
}

double CompiledPolynomial::evaluate(std::span<const double> x) const {
  // Power table; small cases stay on the stack.
  std::size_t tableSize = 0;
  for (std::size_t i = 0; i < numVars_; ++i) tableSize += static_cast<std::size_t>(maxExp_[i]) + 1;
  double stackTable[128];
  std::vector<double> heapTable;
  double* table = stackTable;
  if (tableSize > 128) {
    heapTable.resize(tableSize);
    table = heapTable.data();
  }
  std::size_t offsets[16];
  std::vector<std::size_t> heapOffsets;
  std::size_t* off = offsets;
  if (numVars_ > 16) {
    heapOffsets.resize(numVars_);
    off = heapOffsets.data();
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < numVars_; ++i) {
    off[i] = pos;
    table[pos] = 1.0;
    for (int k = 1; k <= maxExp_[i]; ++k) table[pos + k] = table[pos + k - 1] * x[i];
    pos += static_cast<std::size_t>(maxExp_[i]) + 1;
  }
  double sum = 0.0;
  const int* e = exps_.data();
  for (std::size_t t = 0; t < coefs_.size(); ++t, e += numVars_) {
    double term = coefs_[t];
    for (std::size_t i = 0; i < numVars_; ++i)
      if (e[i]) term *= table[off[i] + e[i]];
    sum += term;
  }
  return sum;
}

CompiledPolynomial::LocalBound CompiledPolynomial::localBound(std::span<const double> center,
                                                              double radius) const {
  // Dense Taylor coefficients of p(center + y), indexed in mixed radix.
  std::vector<std::size_t> stride(numVars_);
  std::size_t size = 1;
  for (std::size_t i = 0; i < numVars_; ++i) {
    stride[i] = size;
    size *= static_cast<std::size_t>(maxExp_[i]) + 1;
  }
  thread_local std::vector<double> dense;
  dense.assign(size, 0.0);

  // Binomials up to the largest exponent.
  const int maxE = numVars_ ? *std::max_element(maxExp_.begin(), maxExp_.end()) : 0;
  thread_local std::vector<std::vector<double>> binom;
  if (static_cast<int>(binom.size()) <= maxE) {
    binom.assign(maxE + 1, {});
    for (int a = 0; a <= maxE; ++a) {
      binom[a].assign(a + 1, 1.0);
      for (int b = 1; b < a; ++b) binom[a][b] = binom[a - 1][b - 1] + binom[a - 1][b];
    }
  }

  std::vector<int> a(numVars_);
  const int* e = exps_.data();
  double absValue = 0.0;
  for (std::size_t t = 0; t < coefs_.size(); ++t, e += numVars_) {
    double absTerm = std::abs(coefs_[t]);
    for (std::size_t i = 0; i < numVars_; ++i) absTerm *= std::pow(std::abs(center[i]), e[i]);
    absValue += absTerm;
    // Enumerate all a <= e.
    std::fill(a.begin(), a.end(), 0);
    while (true) {
      double c = coefs_[t];
      std::size_t idx = 0;
      for (std::size_t i = 0; i < numVars_; ++i) {
        c *= binom[e[i]][a[i]];
        const int rest = e[i] - a[i];
        for (int k = 0; k < rest; ++k) c *= center[i];
        idx += stride[i] * static_cast<std::size_t>(a[i]);
      }
      dense[idx] += c;
      std::size_t i = 0;
      for (; i < numVars_; ++i) {
        if (a[i] < e[i]) {
          ++a[i];
          break;
        }
        a[i] = 0;
      }
      if (i == numVars_) break;
    }
  }

  // Rounding in the re-expansion is bounded by a small multiple of the sum of
  // absolute term values.
  const double eps = std::numeric_limits<double>::epsilon();
  LocalBound out{dense.empty() ? 0.0 : dense[0], 0.0,
                 4.0 * eps * static_cast<double>(coefs_.size() + 2 * degree_ + 2) * absValue};
  double gradSq = 0.0;
  double higher = 0.0;
  for (std::size_t idx = 1; idx < size; ++idx) {
    const double c = dense[idx];
    if (c == 0.0) continue;
    std::size_t rem = idx;
    int deg = 0;
    for (std::size_t i = numVars_; i-- > 0;) {
      deg += static_cast<int>(rem / stride[i]);
      rem %= stride[i];
    }
    if (deg == 1) {
      gradSq += c * c;
    } else {
      higher += std::abs(c) * deg * std::pow(radius, deg - 1);
    }
  }
  out.lipschitz = (std::sqrt(gradSq) + higher) * (1.0 + 1e-12);
  return out;
}

// ---------------------------------------------------------------------------

PolyMap::PolyMap(std::size_t n, std::vector<SparsePolynomial> components)
    : n_(n), components_(std::move(components)) {
  if (n_ < 1) throw Error(ErrorKind::InvalidArgument, "PolyMap needs n >= 1");
  if (components_.empty()) throw Error(ErrorKind::InvalidArgument, "PolyMap needs q >= 1");
  for (const auto& c : components_)
    if (c.numVars() != n_) throw Error(ErrorKind::DimensionMismatch, "component numVars != n");
  compiled_.reserve(components_.size());
  partials_.reserve(components_.size() * n_);
  for (const auto& c : components_) {
    compiled_.emplace_back(c);
    for (std::size_t v = 0; v < n_; ++v) partials_.emplace_back(c.derivative(v));
  }
}

PolyMap PolyMap::zero(std::size_t n, std::size_t q) {
  return PolyMap(n, std::vector<SparsePolynomial>(q, SparsePolynomial(n)));
}

PolyMap PolyMap::identity(std::size_t n) {
  std::vector<SparsePolynomial> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(SparsePolynomial::variable(n, i));
  return PolyMap(n, std::move(comps));
}

int PolyMap::degree() const {
  int d = 0;
  for (const auto& c : components_) d = std::max(d, c.totalDegree());
  return d;
}

Vec PolyMap::evaluate(std::span<const double> x) const {
  Vec out(q());
  evaluateInto(x, out);
  return out;
}

void PolyMap::evaluateInto(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < compiled_.size(); ++i) out[i] = compiled_[i].evaluate(x);
}

void PolyMap::jacobianInto(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < partials_.size(); ++k) out[k] = partials_[k].evaluate(x);
}

Vec evalPolyMap(const PolyMap& map, std::span<const double> x) {
  if (x.size() != map.n())
    throw Error(ErrorKind::DimensionMismatch,
                "point has dimension " + std::to_string(x.size()) + ", map expects " + std::to_string(map.n()));
  return map.evaluate(x);
}

double lipschitzBound(const PolyMap& map, std::span<const double> center, double radius) {
  double c2 = 0.0;
  for (double v : center) c2 += v * v;
  const double reach = std::sqrt(c2) + radius;
  double worst = 0.0;
  for (const auto& comp : map.components()) {
    double sum = 0.0;
    for (const auto& [e, c] : comp.terms()) {
      const int deg = std::accumulate(e.begin(), e.end(), 0);
      if (deg == 0) continue;
      sum += std::abs(toDouble(c)) * deg * std::pow(reach, deg - 1);
    }
    worst = std::max(worst, sum);
  }
  return std::sqrt(static_cast<double>(map.q())) * worst;
}

PolyMap shiftMap(const PolyMap& map, std::span<const Rational> tau) {
  if (tau.size() != map.n()) throw Error(ErrorKind::DimensionMismatch, "shift dimension != n");
  std::vector<Rational> neg(tau.begin(), tau.end());
  for (auto& v : neg) v = -v;
  std::vector<SparsePolynomial> comps;
  for (const auto& c : map.components()) comps.push_back(c.translate(neg));
  return PolyMap(map.n(), std::move(comps));
}

PolyMap shiftMap(const PolyMap& map, std::span<const double> tau) {
  std::vector<Rational> r;
  for (double v : tau) r.push_back(rationalFromDouble(v));
  return shiftMap(map, std::span<const Rational>(r));
}

PolyMap offsetMap(const PolyMap& map, std::span<const Rational> c) {
  if (c.size() != map.q()) throw Error(ErrorKind::DimensionMismatch, "offset dimension != q");
  std::vector<SparsePolynomial> comps = map.components();
  for (std::size_t i = 0; i < comps.size(); ++i)
    comps[i].addTerm(Exponent(map.n(), 0), c[i]);
  return PolyMap(map.n(), std::move(comps));
}

PolyMap offsetMap(const PolyMap& map, std::span<const double> c) {
  std::vector<Rational> r;
  for (double v : c) r.push_back(rationalFromDouble(v));
  return offsetMap(map, std::span<const Rational>(r));
}

PolyMap substituteVariable(const PolyMap& map, std::size_t var, double value) {
  if (map.n() < 2) throw Error(ErrorKind::DimensionMismatch, "cannot remove the only variable");
  const Rational v = rationalFromDouble(value);
  std::vector<SparsePolynomial> comps;
  for (const auto& c : map.components()) comps.push_back(c.substitute(var, v));
  return PolyMap(map.n() - 1, std::move(comps));
}

PolyMap embedMap(const PolyMap& map, std::size_t extraVars) {
  std::vector<SparsePolynomial> comps;
  for (const auto& c : map.components()) comps.push_back(c.withExtraVariables(extraVars));
  return PolyMap(map.n() + extraVars, std::move(comps));
}

nlohmann::json toJson(const PolyMap& map) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : map.components()) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [e, coef] : c.terms())
      terms.push_back({{"exp", e}, {"coef", formatRational(coef)}});
    comps.push_back(terms);
  }
  return {{"n", map.n()}, {"q", map.q()}, {"components", comps}};
}

PolyMap polyMapFromJson(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<long>();
    const auto q = j.at("q").get<long>();
    if (n < 1 || q < 1) throw Error(ErrorKind::ParseError, "n and q must be positive");
    const auto& comps = j.at("components");
    if (!comps.is_array() || static_cast<long>(comps.size()) != q)
      throw Error(ErrorKind::ParseError, "components must list q polynomials");
    std::vector<SparsePolynomial> polys;
    for (const auto& terms : comps) {
      SparsePolynomial p(static_cast<std::size_t>(n));
      for (const auto& t : terms) {
        const auto exp = t.at("exp").get<Exponent>();
        if (static_cast<long>(exp.size()) != n) throw Error(ErrorKind::ParseError, "exponent length != n");
        const auto& coef = t.at("coef");
        Rational c = coef.is_string() ? parseRational(coef.get<std::string>())
                     : coef.is_number_integer() ? Rational(coef.get<long long>())
                                                : throw Error(ErrorKind::ParseError, "coef must be a decimal string");
        p.addTerm(exp, c);
      }
      polys.push_back(std::move(p));
    }
    return PolyMap(static_cast<std::size_t>(n), std::move(polys));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace isozero

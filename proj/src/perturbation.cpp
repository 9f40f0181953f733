#include "isozero/perturbation.hpp"

#include "isozero/certification.hpp"
#include "isozero/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace isozero {

namespace {

Field fieldOf(const PolyMap& map) {
  auto shared = std::make_shared<const PolyMap>(map);
  return [shared](std::span<const double> x) { return shared->evaluate(x); };
}

double diffNorm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Halton interior points plus points on a few concentric spheres, so both
// the bulk and the boundary of the ball are represented.
std::vector<Vec> ballSamples(const BallSpec& ball, std::size_t count) {
  std::vector<Vec> pts = haltonInBall(ball, count);
  const std::size_t perShell = std::max<std::size_t>(count / 20, 50);
  for (double frac : {1.0, 0.75, 0.5, 0.25}) {
    if (ball.dim() == 1) {
      pts.push_back({ball.center[0] - frac * ball.radius});
      pts.push_back({ball.center[0] + frac * ball.radius});
      continue;
    }
    for (auto& x : haltonOnSphere(BallSpec(ball.center, frac * ball.radius), perShell)) pts.push_back(std::move(x));
  }
  return pts;
}

// Directions times radii in the shell [r0, r1] around p.
std::vector<Vec> shellSamples(std::span<const double> p, double r0, double r1, std::size_t count) {
  const std::size_t radii = 9;
  const std::size_t dirs = std::max<std::size_t>(count / radii, 16);
  Vec center(p.begin(), p.end());
  std::vector<Vec> unit;
  if (center.size() == 1) {
    unit = {Vec{-1.0}, Vec{1.0}};
  } else {
    unit = haltonOnSphere(BallSpec(Vec(center.size(), 0.0), 1.0), dirs);
  }
  std::vector<Vec> pts;
  pts.reserve(unit.size() * radii);
  for (std::size_t k = 0; k < radii; ++k) {
    const double r = r0 + (r1 - r0) * static_cast<double>(k) / static_cast<double>(radii - 1);
    for (const auto& u : unit) {
      Vec x(center.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = center[i] + r * u[i];
      pts.push_back(std::move(x));
    }
  }
  return pts;
}

}  // namespace

double sampledSupOnBall(const Field& f, const BallSpec& ball, std::size_t samples) {
  double sup = 0.0;
  for (const auto& x : ballSamples(ball, samples)) sup = std::max(sup, norm(f(x)));
  return sup;
}

double chooseDelta(const PolyMap& f, std::span<const double> p, double rho, double epsilon, std::size_t samples) {
  if (!(rho > 0.0) || !(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "rho and epsilon must be positive");
  const Field field = fieldOf(f);
  double delta = rho;
  for (int k = 0; k < 60; ++k, delta *= 0.5) {
    if (sampledSupOnBall(field, BallSpec(Vec(p.begin(), p.end()), delta / 2.0), samples) < epsilon / 2.0)
      return delta;
  }
  throw Error(ErrorKind::SupNormTooLarge, "no delta found with sup |f| < epsilon/2");
}

// ---------------------------------------------------------------------------

PiecewiseRadialMap::PiecewiseRadialMap(PolyMap f, Vec p, double delta, SphereNullHomotopy phi, double m,
                                       double epsilon)
    : f_(std::make_shared<const PolyMap>(std::move(f))),
      p_(std::move(p)),
      delta_(delta),
      phi_(std::move(phi)),
      m_(m),
      epsilon_(epsilon) {}

Vec PiecewiseRadialMap::evaluate(std::span<const double> x) const {
  const double s = distance(x, p_);
  if (s >= delta_ / 2.0) return f_->evaluate(x);
  if (s <= delta_ / 4.0) return phi_.targetConstant();
  return phi_.evaluate(radialPoint(p_, x, delta_ / (2.0 * s)), 2.0 - 4.0 * s / delta_);
}

Field PiecewiseRadialMap::asField() const {
  auto self = std::make_shared<const PiecewiseRadialMap>(*this);
  return [self](std::span<const double> x) { return self->evaluate(x); };
}

namespace {

// Projected descent of |f|^2 on the sphere with central-difference gradients,
// started from a sample point. Returns the smallest |f| seen.
double polishSphereMin(const std::function<double(const Vec&)>& mag, const BallSpec& sphere, Vec x) {
  const std::size_t n = x.size();
  const double r = sphere.radius;
  auto project = [&](Vec& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (y[i] - sphere.center[i]) * (y[i] - sphere.center[i]);
    s = std::sqrt(s);
    for (std::size_t i = 0; i < n; ++i) y[i] = sphere.center[i] + r * (y[i] - sphere.center[i]) / s;
  };
  double best = mag(x);
  double step = 0.05 * r;
  const double hd = 1e-7 * r;
  for (int it = 0; it < 200 && step > 1e-12 * r; ++it) {
    Vec g(n);
    double gn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Vec a = x, b = x;
      a[i] += hd;
      b[i] -= hd;
      g[i] = (mag(a) - mag(b)) / (2.0 * hd);
    }
    // Tangential part only.
    double radial = 0.0;
    for (std::size_t i = 0; i < n; ++i) radial += g[i] * (x[i] - sphere.center[i]) / r;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] -= radial * (x[i] - sphere.center[i]) / r;
      gn += g[i] * g[i];
    }
    gn = std::sqrt(gn);
    if (gn == 0.0) break;
    Vec y = x;
    for (std::size_t i = 0; i < n; ++i) y[i] -= step * g[i] / gn;
    project(y);
    const double v = mag(y);
    if (v < best) {
      best = v;
      x = std::move(y);
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return best;
}

}  // namespace

double measureMinMagnitude(const SphereNullHomotopy& phi, std::size_t uSteps) {
  std::vector<Vec> nodes;
  if (phi.lift())
    nodes = phi.lift()->nodes;
  else if (phi.sphere().dim() == 1)
    nodes = {Vec{phi.sphere().center[0] - phi.sphere().radius}, Vec{phi.sphere().center[0] + phi.sphere().radius}};
  else
    nodes = haltonOnSphere(phi.sphere(), 2000);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& x : nodes)
    for (std::size_t k = 0; k < uSteps; ++k)
      m = std::min(m, norm(phi.evaluate(x, static_cast<double>(k) / static_cast<double>(uSteps - 1))));
  if (phi.sphere().dim() < 2) return m;

  // |phi(x, u)| = |f(x)|^(1-u) |c|^u >= min(|f(x)|, |c|), so the infimum is
  // min(|c|, min |f| on the sphere). The sphere minimum usually falls between
  // nodes; find it with a dense sample and local polishing.
  const auto mag = [&phi](const Vec& x) { return norm(phi.evaluate(x, 0.0)); };
  std::vector<Vec> probes = haltonOnSphere(phi.sphere(), 20000);
  probes.insert(probes.end(), nodes.begin(), nodes.end());
  std::vector<std::pair<double, std::size_t>> ranked(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) ranked[i] = {mag(probes[i]), i};
  const std::size_t keep = std::min<std::size_t>(16, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end());
  m = std::min(m, norm(phi.targetConstant()));
  for (std::size_t i = 0; i < keep; ++i) m = std::min(m, polishSphereMin(mag, phi.sphere(), probes[ranked[i].second]));
  return m;
}

PiecewiseRadialMap buildPerturbation(const PolyMap& f, std::span<const double> p, double R, double rho,
                                     double epsilon, const SphereNullHomotopy& phi) {
  if (p.size() != f.n()) throw Error(ErrorKind::DimensionMismatch, "p dimension != map.n");
  if (!(rho > 0.0) || rho > R) throw Error(ErrorKind::InvalidArgument, "need 0 < rho <= R");
  const double delta = 2.0 * phi.sphere().radius;
  if (phi.sphere().dim() != p.size() || distance(phi.sphere().center, p) > 1e-12 || delta > rho * (1.0 + 1e-12))
    throw Error(ErrorKind::HomotopyDomainMismatch, "phi must live on S(p, delta/2) with delta <= rho");
  if (std::abs(phi.epsilon() - epsilon) > 1e-12 * epsilon)
    throw Error(ErrorKind::HomotopyDomainMismatch, "phi was built for a different epsilon");
  const Vec center(p.begin(), p.end());
  if (sampledSupOnBall(fieldOf(f), BallSpec(center, delta / 2.0), 4000) >= epsilon / 2.0)
    throw Error(ErrorKind::SupNormTooLarge, "sup |f| on the delta/2 ball >= epsilon/2");
  const double m = measureMinMagnitude(phi);
  return PiecewiseRadialMap(f, center, delta, phi, m, epsilon);
}

PiecewiseRadialMap buildPerturbationAuto(const PolyMap& f, std::span<const double> p, double R, double rho,
                                         double epsilon, int meshLevel) {
  const double delta = chooseDelta(f, p, rho, epsilon);
  const BallSpec sphere(Vec(p.begin(), p.end()), delta / 2.0);
  SphereMesh mesh;
  if (f.n() == 2 || f.n() == 3) mesh = buildSphereMesh(sphere, f.n(), meshLevel);
  const auto phi = buildNullHomotopy(f, p, delta, epsilon, mesh);
  return buildPerturbation(f, p, R, rho, epsilon, phi);
}

// ---------------------------------------------------------------------------
// Polynomial fit

namespace {

void enumerateExponents(std::size_t n, int degree, Exponent& cur, std::size_t var, int remaining,
                        std::vector<Exponent>& out) {
  if (var == n) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[var] = e;
    enumerateExponents(n, degree, cur, var + 1, remaining - e, out);
  }
  cur[var] = 0;
}

std::vector<Exponent> exponentsUpTo(std::size_t n, int degree) {
  std::vector<Exponent> out;
  Exponent cur(n, 0);
  enumerateExponents(n, degree, cur, 0, degree, out);
  return out;
}

// cheb[k][j] = coefficient of y^j in T_k(y).
std::vector<std::vector<double>> chebyshevToMonomial(int degree) {
  std::vector<std::vector<double>> c(degree + 1, std::vector<double>(degree + 1, 0.0));
  c[0][0] = 1.0;
  if (degree >= 1) c[1][1] = 1.0;
  for (int k = 2; k <= degree; ++k)
    for (int j = 0; j <= k; ++j) c[k][j] = (j > 0 ? 2.0 * c[k - 1][j - 1] : 0.0) - c[k - 2][j];
  return c;
}

void accumulateMonomials(const Exponent& alpha, std::size_t var, double weight, Exponent& beta,
                         const std::vector<std::vector<double>>& cheb, std::map<Exponent, double>& acc) {
  if (var == alpha.size()) {
    acc[beta] += weight;
    return;
  }
  for (int j = alpha[var] % 2; j <= alpha[var]; j += 2) {
    beta[var] = j;
    accumulateMonomials(alpha, var + 1, weight * cheb[alpha[var]][j], beta, cheb, acc);
  }
  beta[var] = 0;
}

}  // namespace

FitResult fitPolynomialOnBall(const Field& g0, std::size_t q, const BallSpec& ball, double targetSup,
                              int maxDegree) {
  if (!(targetSup > 0.0)) throw Error(ErrorKind::InvalidArgument, "targetSup must be positive");
  if (maxDegree < 0) throw Error(ErrorKind::InvalidArgument, "maxDegree must be non-negative");
  const std::size_t n = ball.dim();
  const double r = ball.radius;

  const std::size_t maxBasis = exponentsUpTo(n, maxDegree).size();
  const std::size_t N = std::max<std::size_t>(3 * maxBasis, 400);
  const auto train = haltonInBall(ball, N);
  auto validate = ballSamples(ball, std::max<std::size_t>(N / 2, 2000));
  // Shift the validation Halton stream away from the training one.
  {
    auto extra = haltonInBall(ball, 2000, 100003);
    validate.insert(validate.end(), extra.begin(), extra.end());
  }

  // Scaled coordinates y = (x - c)/r and the data, computed once.
  Eigen::MatrixXd Y(N, n), B(N, q);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < n; ++k) Y(i, k) = (train[i][k] - ball.center[k]) / r;
    const Vec v = g0(train[i]);
    if (v.size() != q) throw Error(ErrorKind::DimensionMismatch, "g0 output size != q");
    for (std::size_t k = 0; k < q; ++k) B(i, k) = v[k];
  }
  std::vector<Vec> validateValues;
  validateValues.reserve(validate.size());
  for (const auto& x : validate) validateValues.push_back(g0(x));

  const auto cheb = chebyshevToMonomial(maxDegree);
  std::vector<int> schedule;
  for (int d = 0; d <= maxDegree; d += (d < 8 ? 1 : 2)) schedule.push_back(d);
  if (schedule.back() != maxDegree) schedule.push_back(maxDegree);

  double lastError = std::numeric_limits<double>::infinity();
  for (int d : schedule) {
    const auto basis = exponentsUpTo(n, d);
    const std::size_t rows = std::min(N, std::max<std::size_t>(3 * basis.size(), 400));
    // Chebyshev values per sample and coordinate.
    Eigen::MatrixXd A(rows, basis.size());
    std::vector<double> T((d + 1) * n);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        const double y = Y(i, k);
        T[k * (d + 1)] = 1.0;
        if (d >= 1) T[k * (d + 1) + 1] = y;
        for (int j = 2; j <= d; ++j) T[k * (d + 1) + j] = 2.0 * y * T[k * (d + 1) + j - 1] - T[k * (d + 1) + j - 2];
      }
      for (std::size_t b = 0; b < basis.size(); ++b) {
        double v = 1.0;
        for (std::size_t k = 0; k < n; ++k) v *= T[k * (d + 1) + basis[b][k]];
        A(i, b) = v;
      }
    }
    const Eigen::MatrixXd coef = A.householderQr().solve(B.topRows(rows));

    std::vector<SparsePolynomial> comps;
    for (std::size_t c = 0; c < q; ++c) {
      std::map<Exponent, double> mono;
      Exponent beta(n, 0);
      for (std::size_t b = 0; b < basis.size(); ++b)
        accumulateMonomials(basis[b], 0, coef(b, c), beta, cheb, mono);
      SparsePolynomial poly(n);
      for (const auto& [e, v] : mono) {
        int total = 0;
        for (int ei : e) total += ei;
        const double scaled = v / std::pow(r, total);
        if (scaled != 0.0 && std::isfinite(scaled)) poly.addTerm(e, rationalFromDouble(scaled));
      }
      bool shifted = false;
      for (double ci : ball.center) shifted = shifted || ci != 0.0;
      if (shifted) {
        std::vector<Rational> s;
        for (double ci : ball.center) s.push_back(-rationalFromDouble(ci));
        poly = poly.translate(s);
      }
      comps.push_back(std::move(poly));
    }
    PolyMap h(n, std::move(comps));
    double err = 0.0;
    for (std::size_t i = 0; i < validate.size(); ++i) err = std::max(err, diffNorm(h.evaluate(validate[i]), validateValues[i]));
    lastError = err;
    if (err < targetSup) return {std::move(h), d, err};
  }
  throw Error(ErrorKind::DegreeExhausted,
              "sup error " + std::to_string(lastError) + " >= target at maximum degree", maxDegree);
}

// ---------------------------------------------------------------------------
// Blend

BlendedPolynomialMap::BlendedPolynomialMap(PolyMap f, PolyMap h, Vec p, double delta1, double delta, double m,
                                           double epsilon)
    : f_(std::make_shared<const PolyMap>(std::move(f))),
      h_(std::make_shared<const PolyMap>(std::move(h))),
      p_(std::move(p)),
      delta1_(delta1),
      delta_(delta),
      m_(m),
      epsilon_(epsilon) {}

double BlendedPolynomialMap::chi(double s) const {
  if (s <= delta1_) return 1.0;
  if (s >= delta_ / 2.0) return 0.0;
  return (s - delta_ / 2.0) / (delta1_ - delta_ / 2.0);
}

Vec BlendedPolynomialMap::evaluate(std::span<const double> x) const {
  const double s = distance(x, p_);
  if (s >= delta_ / 2.0) return f_->evaluate(x);
  if (s <= delta1_) return h_->evaluate(x);
  const double w = chi(s);
  Vec a = h_->evaluate(x);
  const Vec b = f_->evaluate(x);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = w * a[i] + (1.0 - w) * b[i];
  return a;
}

Field BlendedPolynomialMap::asField() const {
  auto self = std::make_shared<const BlendedPolynomialMap>(*this);
  return [self](std::span<const double> x) { return self->evaluate(x); };
}

namespace {

double shellMaxDeviation(const PiecewiseRadialMap& g0, double r0, double r1, std::size_t samples) {
  double worst = 0.0;
  for (const auto& x : shellSamples(g0.p(), r0, r1, samples))
    worst = std::max(worst, diffNorm(g0.f().evaluate(x), g0.evaluate(x)));
  return worst;
}

}  // namespace

double chooseBlendRadius(const PiecewiseRadialMap& g0, std::size_t samples) {
  const double half = g0.delta() / 2.0;
  for (int k = 0; k < 40; ++k) {
    const double d1 = half - (g0.delta() / 4.0) * std::ldexp(1.0, -k);
    if (shellMaxDeviation(g0, d1, half, samples) < g0.m() / 2.0) return d1;
  }
  throw Error(ErrorKind::ShellBoundViolated, "no blend radius satisfies the shell bound");
}

BlendedPolynomialMap blendWithCutoff(const PiecewiseRadialMap& g0, const PolyMap& h, double delta1,
                                     std::size_t samples) {
  const double delta = g0.delta();
  if (!(delta1 > 0.0 && delta1 < delta / 2.0)) throw Error(ErrorKind::InvalidArgument, "need 0 < delta1 < delta/2");
  if (h.n() != g0.f().n() || h.q() != g0.f().q()) throw Error(ErrorKind::DimensionMismatch, "h and f differ in shape");
  const double m = g0.m();
  const double shell = shellMaxDeviation(g0, delta1, delta / 2.0, 4000);
  if (!(shell < m / 2.0)) throw Error(ErrorKind::ShellBoundViolated, "|f - g0| >= m/2 on the blend shell");

  const double epsilon = 2.0 * g0.epsilon();
  BlendedPolynomialMap g(g0.f(), h, g0.p(), delta1, delta, m, epsilon);

  const auto pts = ballSamples(BallSpec(g0.p(), delta / 2.0), samples);
  double fitErr = 0.0, lower = std::numeric_limits<double>::infinity(), upper = 0.0, close = 0.0;
  for (const auto& x : pts) {
    const Vec gx = g.evaluate(x);
    fitErr = std::max(fitErr, diffNorm(h.evaluate(x), g0.evaluate(x)));
    lower = std::min(lower, norm(gx));
    upper = std::max(upper, norm(gx));
    close = std::max(close, diffNorm(gx, g0.f().evaluate(x)));
  }
  Report rep;
  rep.add("shell |f - g0| < m/2", CheckTag::ShellCloseness, shell, m / 2.0, shell < m / 2.0);
  rep.add("fit |h - g0| < m/2", CheckTag::FitSupError, fitErr, m / 2.0, fitErr < m / 2.0);
  rep.add("lower |g| > m/2", CheckTag::BlendLowerBound, lower, m / 2.0, lower > m / 2.0 - 1e-9);
  rep.add("upper |g| < eps/2", CheckTag::BlendUpperBound, upper, epsilon / 2.0, upper < epsilon / 2.0);
  rep.add("closeness |g - f| < eps", CheckTag::CloseToOriginal, close, epsilon, close < epsilon);
  g.setReport(std::move(rep));
  return g;
}

// ---------------------------------------------------------------------------

Report verifyPerturbation(const Field& g, const PolyMap& f, std::span<const double> p, double rho, double R,
                          double epsilon, std::size_t sampleBudget) {
  if (!(rho > 0.0) || !(R > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
  const Vec center(p.begin(), p.end());
  Report rep;

  const auto outer = ballSamples(BallSpec(center, R), sampleBudget);
  double fixed = 0.0, close = 0.0;
  for (const auto& x : outer) {
    const double d = diffNorm(g(x), f.evaluate(x));
    close = std::max(close, d);
    if (distance(x, center) >= rho) fixed = std::max(fixed, d);
  }
  // Points generated on the rho sphere can round to just inside it.
  for (const auto& x : shellSamples(center, rho, std::max(R, rho), sampleBudget / 4))
    if (distance(x, center) >= rho) fixed = std::max(fixed, diffNorm(g(x), f.evaluate(x)));
  rep.add("g = f outside B(p, rho)", CheckTag::FixedOutsideBall, fixed, 0.0, fixed == 0.0);
  rep.add("sup |g - f| < eps", CheckTag::CloseToOriginal, close, epsilon, close < epsilon);

  double certBound = std::numeric_limits<double>::infinity();
  bool certOk = true;
  std::string note;
  if (rho < R) {
    const auto cert = certifyNonvanishingAdaptive(f, center, rho, R);
    certOk = cert.valid();
    certBound = cert.certifiedLowerBound;
    note = std::string("f certificate on [rho, R] ") + (certOk ? "VALID" : "INVALID");
  }
  auto inner = ballSamples(BallSpec(center, rho), sampleBudget);
  inner.push_back(center);
  double innerMin = std::numeric_limits<double>::infinity();
  for (const auto& x : inner) innerMin = std::min(innerMin, norm(g(x)));
  const double value = std::min(innerMin, certBound);
  rep.add("V(g) in B(p, R) empty", CheckTag::NonvanishingInBall, value, 0.0, certOk && innerMin > 0.0, note);
  return rep;
}

}  // namespace isozero

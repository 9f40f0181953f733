#include "isozero/alexander.hpp"

#include "isozero/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace isozero {

std::pair<double, double> radialProfiles(double s, double t, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  if (t == 0.0) return {1.0, 1.0};
  const double t2 = t * t;
  double alpha;
  if (s < t2 / 2.0)
    alpha = delta / t2;
  else if (s < t2)
    alpha = ((1.0 - delta / t2) / (t2 / 2.0)) * (s - t2) + 1.0;
  else
    alpha = 1.0;
  const double beta = s < t ? ((1.0 - 2.0 * t / delta) / t) * s + 2.0 * t / delta : 1.0;
  return {alpha, beta};
}

AlexanderHomotopy::AlexanderHomotopy(PolyMap f, Field g, Vec p, double delta, double m, double gLower,
                                     double epsilon1)
    : f_(std::make_shared<const PolyMap>(std::move(f))),
      g_(std::move(g)),
      p_(std::move(p)),
      delta_(delta),
      m_(m),
      gLower_(gLower),
      epsilon1_(epsilon1) {}

Vec AlexanderHomotopy::evaluateF0(std::span<const double> x, double tau) const {
  const double s = distance(x, p_);
  if (tau == 0.0 || s >= std::max(tau, tau * tau)) return f_->evaluate(x);
  const auto [alpha, beta] = radialProfiles(s, tau, delta_);
  const Vec y = radialPoint(p_, x, alpha);
  Vec v = s < tau * tau / 2.0 ? g_(y) : f_->evaluate(y);
  for (double& c : v) c *= beta;
  return v;
}

Vec AlexanderHomotopy::evaluate(std::span<const double> x, double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::TimeOutOfRange, "homotopy time must lie in [0, 1]");
  return evaluateF0(x, delta_ / 2.0 * t);
}

std::pair<Vec, Vec> AlexanderHomotopy::seamBranches(std::span<const double> x, double tau) const {
  const double s = distance(x, p_);
  const double t2 = tau * tau;
  const double beta = radialProfiles(s, tau, delta_).second;
  // At the seam alpha = delta/t^2 from the left; the right-hand formula is
  // evaluated at the same s.
  const double alphaLeft = delta_ / t2;
  const double alphaRight = ((1.0 - delta_ / t2) / (t2 / 2.0)) * (s - t2) + 1.0;
  Vec a = g_(radialPoint(p_, x, alphaLeft));
  Vec b = f_->evaluate(radialPoint(p_, x, alphaRight));
  for (double& c : a) c *= beta;
  for (double& c : b) c *= beta;
  return {std::move(a), std::move(b)};
}

HomotopyFn AlexanderHomotopy::asFunction() const {
  auto self = std::make_shared<const AlexanderHomotopy>(*this);
  return [self](std::span<const double> x, double t) { return self->evaluate(x, t); };
}

namespace {

double diffNorm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<Vec> unitDirections(std::size_t n, std::size_t count) {
  if (n == 1) {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back({i % 2 ? -1.0 : 1.0});
    return out;
  }
  return haltonOnSphere(BallSpec(Vec(n, 0.0), 1.0), count);
}

// Points with |x - p| = tau^2/2 for tau spread over (0, delta/2].
double measureSeam(const AlexanderHomotopy& F, std::size_t samples) {
  const auto dirs = unitDirections(F.p().size(), samples);
  double worst = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double tau = F.delta() / 2.0 * (static_cast<double>(i) + 1.0) / static_cast<double>(dirs.size());
    const double s = tau * tau / 2.0;
    Vec x(F.p());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += s * dirs[i][k];
    const auto [a, b] = F.seamBranches(x, tau);
    worst = std::max(worst, diffNorm(a, b));
  }
  return worst;
}

void checkIngredients(const PolyMap& f, const PolyMap& gf, std::span<const double> p, const Vec& gp, double delta,
                      double gdelta) {
  if (!(f == gf)) throw Error(ErrorKind::IngredientMismatch, "g was built from a different f");
  if (p.size() != gp.size() || distance(p, gp) > 1e-12)
    throw Error(ErrorKind::IngredientMismatch, "g was built around a different point");
  if (std::abs(delta - gdelta) > 1e-12 * delta) throw Error(ErrorKind::IngredientMismatch, "delta mismatch");
  if (!(delta < 1.0)) throw Error(ErrorKind::IngredientMismatch, "delta must be below 1");
}

}  // namespace

AlexanderHomotopy buildAlexanderHomotopy(const PolyMap& f, const PiecewiseRadialMap& g, std::span<const double> p,
                                         double delta, double m, std::size_t seamSamples) {
  checkIngredients(f, g.f(), p, g.p(), delta, g.delta());
  if (std::abs(m - g.m()) > 1e-12 * std::max(1.0, m)) throw Error(ErrorKind::IngredientMismatch, "m mismatch");
  AlexanderHomotopy F(f, g.asField(), Vec(p.begin(), p.end()), delta, m, m, std::min(1.0, g.epsilon()));
  F.setSeamError(measureSeam(F, seamSamples));
  return F;
}

AlexanderHomotopy buildAlexanderHomotopy(const PolyMap& f, const BlendedPolynomialMap& g,
                                         std::span<const double> p, double delta, double m,
                                         std::size_t seamSamples) {
  checkIngredients(f, g.f(), p, g.p(), delta, g.delta());
  if (std::abs(m - g.m()) > 1e-12 * std::max(1.0, m)) throw Error(ErrorKind::IngredientMismatch, "m mismatch");
  AlexanderHomotopy F(f, g.asField(), Vec(p.begin(), p.end()), delta, m, m / 2.0, std::min(1.0, g.epsilon()));
  F.setSeamError(measureSeam(F, seamSamples));
  return F;
}

Vec evalHomotopy(const AlexanderHomotopy& F, std::span<const double> x, double t) { return F.evaluate(x, t); }

HomotopyFn twoSided(const HomotopyFn& F) {
  return [F](std::span<const double> x, double t) -> Vec {
    if (!(t >= -1.0 && t <= 1.0)) throw Error(ErrorKind::TimeOutOfRange, "two-sided time must lie in [-1, 1]");
    return F(x, t * t);
  };
}

HomotopyFn twoSided(const AlexanderHomotopy& F) { return twoSided(F.asFunction()); }

Report verifyAlexanderInequalities(const AlexanderHomotopy& F, std::size_t samples) {
  Report rep;
  const std::size_t n = F.p().size();
  const double delta = F.delta();
  const double m = F.m();
  const Vec& p = F.p();

  const double seam = measureSeam(F, samples);
  rep.add("seam continuity", CheckTag::SeamContinuity, seam, 1e-9, seam <= 1e-9);

  // Inner region |x - p| < tau^2/2: radius fractions of tau^2/2 over a tau grid.
  const auto dirs = unitDirections(n, samples);
  double worstInner = std::numeric_limits<double>::infinity();
  std::size_t innerCount = 0;
  double upper = 0.0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double t = (static_cast<double>(i % 50) + 1.0) / 50.0;
    const double tau = delta / 2.0 * t;
    const double frac = (static_cast<double>(i / 50) + 0.5) / static_cast<double>((dirs.size() + 49) / 50);
    const double s = frac * tau * tau / 2.0;
    Vec x(p);
    for (std::size_t k = 0; k < n; ++k) x[k] += s * dirs[i][k];
    const double v = norm(F.evaluateF0(x, tau));
    const double bound = 2.0 * tau / delta * (m / 2.0);
    worstInner = std::min(worstInner, v - bound);
    upper = std::max(upper, v);
    ++innerCount;
  }
  rep.add("inner |F0| >= (2t/delta)(m/2)", CheckTag::InnerLowerBound, worstInner, -1e-9, worstInner >= -1e-9,
          std::to_string(innerCount) + " samples; value is min(|F0| - bound)");

  // Upper bound over the delta/2 ball and the time grid.
  const auto ballPts = haltonInBall(BallSpec(p, delta / 2.0), samples);
  for (std::size_t i = 0; i < ballPts.size(); ++i)
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0})
      upper = std::max(upper, norm(F.evaluate(ballPts[i], t)));
  rep.add("|F0| < eps1/2 on the delta/2 ball", CheckTag::HomotopyUpperBound, upper, F.epsilon1() / 2.0,
          upper < F.epsilon1() / 2.0);

  // Exact identity at t = 0 and exact fixity outside the delta/2 ball.
  double t0 = 0.0, fixed = 0.0;
  const auto wide = haltonInBall(BallSpec(p, 2.0 * delta), samples);
  for (const auto& x : wide) {
    const Vec fx = F.f().evaluate(x);
    t0 = std::max(t0, diffNorm(F.evaluate(x, 0.0), fx));
    if (distance(x, p) > delta / 2.0)
      for (double t : {0.05, 0.5, 1.0}) fixed = std::max(fixed, diffNorm(F.evaluate(x, t), fx));
  }
  rep.add("F(., 0) = f exactly", CheckTag::TimeZeroIdentity, t0, 0.0, t0 == 0.0);
  rep.add("F = f outside B(p, delta/2) exactly", CheckTag::FixedOutsideBall, fixed, 0.0, fixed == 0.0);

  // Continuity at (p, 0) with delta3 = eps2/(1 + 2/delta).
  for (double eps2 : {1e-2, 1e-4}) {
    double d1 = delta;
    for (int k = 0; k < 80; ++k, d1 *= 0.5) {
      double sup = 0.0;
      for (const auto& x : haltonInBall(BallSpec(p, d1), 500)) sup = std::max(sup, norm(F.f().evaluate(x)));
      if (sup < eps2) break;
    }
    const double d2 = std::min(delta, d1);
    const double d3 = eps2 / (1.0 + 2.0 / delta);
    double worst = 0.0;
    const auto pts = haltonInBall(BallSpec(p, d2), samples);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double tau = std::min(delta / 2.0, d3) * (static_cast<double>(i % 20) + 0.5) / 20.0;
      worst = std::max(worst, norm(F.evaluateF0(pts[i], tau)));
    }
    std::ostringstream name;
    name << "continuity at (p, 0), eps2 = " << eps2;
    rep.add(name.str(), CheckTag::ContinuityAtOrigin, worst, eps2, worst < eps2);
  }
  return rep;
}

// ---------------------------------------------------------------------------

TruncationResult truncateHomotopy(const PolyMap& Fpoly, int D, std::span<const double> p, double r0, double r1) {
  const std::size_t n = Fpoly.n() - 1;
  if (Fpoly.n() < 2 || p.size() != n) throw Error(ErrorKind::DimensionMismatch, "F must have n + 1 variables");
  const PolyMap f = substituteVariable(Fpoly, n, 0.0);
  if (D < f.degree()) throw Error(ErrorKind::DegreeTooLow, "truncation degree below deg f", f.degree());
  std::vector<SparsePolynomial> comps;
  for (const auto& c : Fpoly.components()) comps.push_back(c.truncate(D));
  TruncationResult out{PolyMap(Fpoly.n(), std::move(comps)), {}};
  Vec center(p.begin(), p.end());
  center.push_back(0.0);
  out.certificate = certifyNonvanishingAdaptive(out.P, center, r0, r1, {}, "truncation");
  return out;
}

Report verifyNonvanishingFamily(const PolyMap& Fpoly, std::span<const double> p, double R,
                                const std::vector<double>& times, double gridStep) {
  const std::size_t n = Fpoly.n() - 1;
  if (Fpoly.n() < 2 || p.size() != n) throw Error(ErrorKind::DimensionMismatch, "F must have n + 1 variables");
  Report rep;
  AdaptiveOptions opts;
  opts.initialStep = gridStep;
  for (double t : times) {
    const PolyMap slice = substituteVariable(Fpoly, n, t);
    const auto cert = certifyNonvanishingAdaptive(slice, p, 0.0, R, opts);
    std::ostringstream name;
    name << "slice t = " << t;
    std::ostringstream note;
    note << (cert.valid() ? "VALID" : "INVALID") << " adaptive certificate, cells " << cert.samples
         << ", finest cell " << cert.gridStep;
    if (!cert.valid() && t == 0.0) note << "; expected: F(p, 0) = 0";
    rep.add(name.str(), CheckTag::SliceNonvanishing, cert.certifiedLowerBound, 0.0, cert.valid(), note.str());
  }
  return rep;
}

Report verifyNonvanishingFamily(const AlexanderHomotopy& F, double R, const std::vector<double>& times,
                                std::size_t gSamples) {
  Report rep;
  const Vec& p = F.p();
  const double delta = F.delta();
  double gMin = std::numeric_limits<double>::infinity();
  for (const auto& x : haltonInBall(BallSpec(p, delta / 2.0), gSamples)) gMin = std::min(gMin, norm(F.g()(x)));
  for (const auto& x : haltonOnSphere(BallSpec(p, delta / 2.0), gSamples / 10))
    gMin = std::min(gMin, norm(F.g()(x)));
  for (double t : times) {
    std::ostringstream name;
    name << "slice t = " << t;
    if (t <= 0.0) {
      const double v = norm(F.evaluate(p, 0.0));
      rep.add(name.str(), CheckTag::SliceNonvanishing, v, 0.0, v > 0.0, "t = 0 is the original map");
      continue;
    }
    const double tau = delta / 2.0 * t;
    const auto cert = certifyNonvanishingAdaptive(F.f(), p, std::min(tau * tau, R / 2.0), R);
    const double scale = 2.0 * tau / delta;
    const double value = scale * std::min(cert.certifiedLowerBound, gMin);
    std::ostringstream note;
    note << "f certificate on [tau^2, R] " << (cert.valid() ? "VALID" : "INVALID") << " (bound "
         << cert.certifiedLowerBound << "), sampled min |g| " << gMin << ", beta >= " << scale;
    rep.add(name.str(), CheckTag::SliceNonvanishing, value, 0.0, cert.valid() && gMin > 0.0, note.str());
  }
  return rep;
}

}  // namespace isozero

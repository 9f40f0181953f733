#pragma once

#include "isozero/certification.hpp"
#include "isozero/geometry.hpp"
#include "isozero/perturbation.hpp"
#include "isozero/polynomial.hpp"
#include "isozero/report.hpp"

#include <memory>
#include <utility>

namespace isozero {

/// (alpha_t(s), beta_t(s)) for the radial squeeze. alpha is delta/t^2 below
/// t^2/2, linear down to 1 at t^2, then 1; beta rises linearly from 2t/delta
/// at 0 to 1 at s = t. Both are 1 at t = 0.
std::pair<double, double> radialProfiles(double s, double t, double delta);

/// F(x, t) = F0(x, (delta/2) t) with
///   F0(x, tau) = beta g(p + alpha (x - p))   for |x - p| < tau^2/2
///   F0(x, tau) = beta f(p + alpha (x - p))   otherwise,
/// alpha, beta evaluated at (|x - p|, tau). Whenever alpha = beta = 1 (tau = 0
/// or |x - p| >= max(tau, tau^2)) the f branch is returned unscaled, so
/// F(x, 0) = f(x) and F = f outside B(p, delta/2) hold exactly.
class AlexanderHomotopy {
 public:
  AlexanderHomotopy() = default;
  /// gLower is the guaranteed lower bound for |g| on the delta/2 ball (m for
  /// the piecewise g, m/2 for the blended one).
  AlexanderHomotopy(PolyMap f, Field g, Vec p, double delta, double m, double gLower, double epsilon1);

  /// t in [0, 1]; TimeOutOfRange otherwise.
  Vec evaluate(std::span<const double> x, double t) const;
  /// The unscaled F0 at tau in [0, delta/2].
  Vec evaluateF0(std::span<const double> x, double tau) const;
  /// Seam value pair (g branch, f branch) at a point with |x - p| = tau^2/2.
  std::pair<Vec, Vec> seamBranches(std::span<const double> x, double tau) const;
  HomotopyFn asFunction() const;

  const PolyMap& f() const noexcept { return *f_; }
  const Field& g() const noexcept { return g_; }
  const Vec& p() const noexcept { return p_; }
  double delta() const noexcept { return delta_; }
  double m() const noexcept { return m_; }
  double gLower() const noexcept { return gLower_; }
  double epsilon1() const noexcept { return epsilon1_; }
  /// Largest seam discrepancy measured at construction.
  double seamError() const noexcept { return seamError_; }
  void setSeamError(double e) { seamError_ = e; }

 private:
  std::shared_ptr<const PolyMap> f_;
  Field g_;
  Vec p_;
  double delta_ = 0.0;
  double m_ = 0.0;
  double gLower_ = 0.0;
  double epsilon1_ = 0.0;
  double seamError_ = 0.0;
};

/// Builds F from the piecewise perturbation. epsilon1 = min(1, g.epsilon()).
/// Throws IngredientMismatch when g's f, p or delta disagree with the
/// arguments. Measures seam continuity on seamSamples points.
AlexanderHomotopy buildAlexanderHomotopy(const PolyMap& f, const PiecewiseRadialMap& g, std::span<const double> p,
                                         double delta, double m, std::size_t seamSamples = 1000);
/// Same from the blended semialgebraic perturbation (lower bound m/2).
AlexanderHomotopy buildAlexanderHomotopy(const PolyMap& f, const BlendedPolynomialMap& g,
                                         std::span<const double> p, double delta, double m,
                                         std::size_t seamSamples = 1000);

/// Evaluates F(x, t); TimeOutOfRange outside [0, 1].
Vec evalHomotopy(const AlexanderHomotopy& F, std::span<const double> x, double t);

/// (x, t) -> F(x, t^2) for t in [-1, 1].
HomotopyFn twoSided(const AlexanderHomotopy& F);
HomotopyFn twoSided(const HomotopyFn& F);

/// Sampled inequality suite: seam continuity, inner lower bound
/// (2 tau/delta)(m/2), upper bound eps1/2 on the delta/2 ball, exact identity
/// at t = 0 and exact fixity outside the ball, and continuity at (p, 0) for
/// the probes eps2 in {1e-2, 1e-4}.
Report verifyAlexanderInequalities(const AlexanderHomotopy& F, std::size_t samples = 1000);

struct TruncationResult {
  PolyMap P;
  AnnulusCertificate certificate;
};

/// Degree-D truncation of a polynomial family F(x, t) in n + 1 variables
/// (t last) with an annulus certificate around (p, 0) in R^{n+1}.
/// DegreeTooLow when D < deg F(., 0).
TruncationResult truncateHomotopy(const PolyMap& Fpoly, int D, std::span<const double> p, double r0 = 0.05,
                                  double r1 = 0.3);

/// Per-slice full-ball certificates for a polynomial family F(x, t) (t is the
/// last variable): each slice is frozen with exact substitution and passed to
/// the adaptive certifier with initial cell size gridStep.
Report verifyNonvanishingFamily(const PolyMap& Fpoly, std::span<const double> p, double R,
                                const std::vector<double>& times, double gridStep = 0.25);

/// Per-slice check for the constructed homotopy. For t > 0 the slice is
/// beta * f(alpha x) on |x - p| >= tau^2/2, whose arguments cover the shell
/// [tau^2, R], and beta * g(alpha x) inside, whose arguments lie in the
/// delta/2 ball. The slice is certified by an adaptive certificate of f on
/// [tau^2, R], the sampled minimum of |g| on the delta/2 ball and beta >=
/// 2 tau/delta; the reported value is (2 tau/delta) min(f bound, g min).
Report verifyNonvanishingFamily(const AlexanderHomotopy& F, double R, const std::vector<double>& times,
                                std::size_t gSamples = 20000);

}  // namespace isozero

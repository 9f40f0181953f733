#pragma once

#include "isozero/geometry.hpp"
#include "isozero/obstruction.hpp"
#include "isozero/polynomial.hpp"
#include "isozero/report.hpp"

#include <memory>

namespace isozero {

/// Largest delta = rho / 2^k with sampled sup |f| < epsilon/2 on the closed
/// ball B(p, delta/2).
double chooseDelta(const PolyMap& f, std::span<const double> p, double rho, double epsilon,
                   std::size_t samples = 4000);

/// Sampled sup of |f| on the closed ball (Halton interior plus sphere points).
double sampledSupOnBall(const Field& f, const BallSpec& ball, std::size_t samples);

/// The nonvanishing perturbation g:
///   g = c                                              for |x - p| <= delta/4
///   g = phi(p + delta/(2s) (x - p), 2 - 4s/delta)       for delta/4 <= s <= delta/2
///   g = f                                              for s >= delta/2
/// Branches are dispatched exactly, so g = f bit-for-bit outside delta/2.
class PiecewiseRadialMap {
 public:
  PiecewiseRadialMap() = default;
  PiecewiseRadialMap(PolyMap f, Vec p, double delta, SphereNullHomotopy phi, double m, double epsilon);

  Vec evaluate(std::span<const double> x) const;
  Field asField() const;

  const PolyMap& f() const noexcept { return *f_; }
  const Vec& p() const noexcept { return p_; }
  double delta() const noexcept { return delta_; }
  double m() const noexcept { return m_; }
  double epsilon() const noexcept { return epsilon_; }
  const Vec& c() const noexcept { return phi_.targetConstant(); }
  const SphereNullHomotopy& phi() const noexcept { return phi_; }

 private:
  std::shared_ptr<const PolyMap> f_;
  Vec p_;
  double delta_ = 0.0;
  SphereNullHomotopy phi_;
  double m_ = 0.0;
  double epsilon_ = 0.0;
};

/// Sampled min of |phi| over mesh nodes (or sphere samples) times a u-grid.
double measureMinMagnitude(const SphereNullHomotopy& phi, std::size_t uSteps = 41);

/// Builds g from a null-homotopy phi on S(p, delta/2). delta is read from
/// phi and must not exceed rho (HomotopyDomainMismatch); sampled sup |f| on
/// the delta/2 ball must be < epsilon/2 (SupNormTooLarge). m is measured.
PiecewiseRadialMap buildPerturbation(const PolyMap& f, std::span<const double> p, double R, double rho,
                                     double epsilon, const SphereNullHomotopy& phi);

/// Convenience: chooseDelta, mesh, null-homotopy and buildPerturbation.
PiecewiseRadialMap buildPerturbationAuto(const PolyMap& f, std::span<const double> p, double R, double rho,
                                         double epsilon, int meshLevel = 3);

struct FitResult {
  PolyMap h;
  int degree = 0;
  double supError = 0.0;
};

/// Least-squares fit of g0 on the ball in a tensor Chebyshev basis of total
/// degree d (escalated up to maxDegree) on Halton points, converted to a
/// monomial PolyMap. Accepted when the validation sup error is < targetSup;
/// DegreeExhausted otherwise.
FitResult fitPolynomialOnBall(const Field& g0, std::size_t q, const BallSpec& ball, double targetSup,
                              int maxDegree);

/// Continuous semialgebraic perturbation
///   g = chi(s) h + (1 - chi(s)) f,   s = |x - p|,
/// chi = 1 on [0, delta1], linear down to 0 at delta/2, 0 after.
class BlendedPolynomialMap {
 public:
  BlendedPolynomialMap() = default;
  BlendedPolynomialMap(PolyMap f, PolyMap h, Vec p, double delta1, double delta, double m, double epsilon);

  Vec evaluate(std::span<const double> x) const;
  Field asField() const;
  double chi(double s) const;

  const PolyMap& f() const noexcept { return *f_; }
  const PolyMap& h() const noexcept { return *h_; }
  const Vec& p() const noexcept { return p_; }
  double delta1() const noexcept { return delta1_; }
  double delta() const noexcept { return delta_; }
  /// Lower bound for |g| on the delta/2 ball is m/2.
  double m() const noexcept { return m_; }
  double epsilon() const noexcept { return epsilon_; }
  /// Checks recorded by blendWithCutoff.
  const Report& report() const noexcept { return report_; }
  void setReport(Report r) { report_ = std::move(r); }

 private:
  std::shared_ptr<const PolyMap> f_;
  std::shared_ptr<const PolyMap> h_;
  Vec p_;
  double delta1_ = 0.0;
  double delta_ = 0.0;
  double m_ = 0.0;
  double epsilon_ = 0.0;
  Report report_;
};

/// Smallest delta1 of the form delta/2 - (delta/4) 2^-k with sampled
/// |f - g0| < m/2 on the shell [delta1, delta/2]; ShellBoundViolated if none.
double chooseBlendRadius(const PiecewiseRadialMap& g0, std::size_t samples = 4000);

/// Blends f and h around p. g0 is the piecewise map whose delta, m and
/// epsilon/2 this construction refines, so the result targets 2 g0.epsilon().
/// Verifies the shell precondition (ShellBoundViolated), then records the
/// lower bound m/2, the upper bound epsilon/2 and closeness < epsilon.
BlendedPolynomialMap blendWithCutoff(const PiecewiseRadialMap& g0, const PolyMap& h, double delta1,
                                     std::size_t samples = 20000);

/// Checks g against f: equality outside B(p, rho) on samples, sup |g - f| <
/// epsilon on B(p, R), and nonvanishing on B(p, R) (certificate of f on
/// [rho, R] plus sampled min of g inside rho).
Report verifyPerturbation(const Field& g, const PolyMap& f, std::span<const double> p, double rho, double R,
                          double epsilon, std::size_t sampleBudget = 20000);

}  // namespace isozero

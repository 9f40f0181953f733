#pragma once

#include "isozero/geometry.hpp"
#include "isozero/obstruction.hpp"
#include "isozero/polynomial.hpp"
#include "isozero/report.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <vector>

namespace isozero {

using ComplexField = std::function<Complex(std::span<const double>)>;

// ---------------------------------------------------------------------------
// One variable: complexification

struct ComplexifiedPolynomial {
  /// coefficients[k] multiplies z^k.
  std::vector<Complex> coefficients;
  /// Every root of F (companion-matrix eigenvalues plus the factored zeros).
  std::vector<Complex> roots;
  /// Roots with |z| < rho0, with multiplicity.
  std::vector<Complex> rootsInside;
  /// Distinct roots with |z| < rho0 (roots closer than 1e-8 are merged).
  std::size_t distinctRootsInside = 0;

  Complex evaluate(Complex z) const;
  /// (x, t) -> F(x + i t) as a real pair.
  HomotopyFn asHomotopy() const;
};

/// F(z) = sum (a_k + i b_k) z^k for f = (sum a_k x^k, sum b_k x^k). Throws
/// NonIsolatedComplexZero when a nonzero root lies inside |z| < rho0.
ComplexifiedPolynomial complexify1d(const PolyMap& f, double rho0);

// ---------------------------------------------------------------------------
// Poisson integral on a ball

/// u(x) = sum_j w_j P(x, xi_j) d_j / sum_j w_j P(x, xi_j) with the Poisson
/// kernel P = (R^2 - |x - c|^2) / (omega R |x - xi|^n). Dividing by the
/// discrete kernel mass makes constants exact.
class HarmonicField {
 public:
  HarmonicField() = default;
  HarmonicField(SphereQuadrature quadrature, std::vector<Complex> data);

  /// Throws EvalTooCloseToBoundary when |x - c| > 0.95 R.
  Complex evaluate(std::span<const double> x) const;
  const BallSpec& ball() const noexcept { return quad_.ball; }
  const SphereQuadrature& quadrature() const noexcept { return quad_; }
  const std::vector<Complex>& data() const noexcept { return data_; }

 private:
  SphereQuadrature quad_;
  std::vector<Complex> data_;
};

/// Default quadrature for poissonSolveBall: 2048-gon for n = 2, 45 x 90 Gauss
/// product for n = 3.
SphereQuadrature defaultPoissonQuadrature(const BallSpec& ball, std::size_t n);

HarmonicField poissonSolveBall(const SphereQuadrature& quadrature, std::vector<Complex> boundaryValues);
/// Boundary data given as a function on the sphere.
HarmonicField poissonSolveBall(const SphereQuadrature& quadrature, const ComplexField& boundary);

/// m(x) = exp(-u(x)) where u is the harmonic extension of log f from
/// S(p, rho2). Inside 0.95 rho2 u is the Poisson integral; on the rim
/// (0.95 rho2, rho2] it blends radially to the exact log f on the sphere, so
/// m f = 1 there.
class BoundaryMultiplier {
 public:
  BoundaryMultiplier() = default;
  BoundaryMultiplier(HarmonicField u, std::shared_ptr<const AngleLift> sphereLift);

  Complex logValue(std::span<const double> x) const;
  Complex evaluate(std::span<const double> x) const { return std::exp(-logValue(x)); }
  /// Exact log f at the radial projection onto the sphere.
  Complex boundaryLog(std::span<const double> x) const;
  const HarmonicField& harmonic() const noexcept { return u_; }

 private:
  HarmonicField u_;
  std::shared_ptr<const AngleLift> lift_;
};

// ---------------------------------------------------------------------------
// Polar lift, root order, root field

/// Lift of mf over concentric copies of a sphere mesh at radii
/// rho * {1, 0.9, ..., 0.1}, joined radially. Basepoint (p1 + rho, p2, ...).
AngleLift polarLift(const ComplexField& mf, const BallSpec& ball, int meshLevel, int layers = 10);

/// k = floor(sup |theta| / (pi/2)) + 1 with the sup taken over both lifts.
/// Throws ThetaUnbounded when the refined sup exceeds twice the coarse one
/// plus pi/2.
int chooseRootOrder(double supTheta);
int chooseRootOrder(const AngleLift& coarse, const AngleLift& refined);

/// (m f)^(1/k) = r^(1/k) exp(i theta/k), 0 at the puncture.
class RootField {
 public:
  RootField() = default;
  RootField(ComplexField mf, std::shared_ptr<const AngleLift> lift, int k);

  Complex evaluate(std::span<const double> x) const;
  int k() const noexcept { return k_; }
  const AngleLift& lift() const noexcept { return *lift_; }
  const Report& report() const noexcept { return report_; }
  void setReport(Report r) { report_ = std::move(r); }

 private:
  ComplexField mf_;
  std::shared_ptr<const AngleLift> lift_;
  int k_ = 1;
  Vec center_;
  Report report_;
};

/// Checks sup |theta|/k < pi/2 (AngleBudgetExceeded otherwise), records
/// Re >= -1e-9 on samples and value 1 on the outer sphere nodes.
RootField kthRootField(const ComplexField& mf, std::shared_ptr<const AngleLift> lift, int k,
                       std::size_t samples = 4000);

struct HolderReport {
  double C1 = 0.0;
  double C2 = 0.0;
  /// max over pairs of |g(y) - g(x)| / (C2 |y - x|^(1/k)); <= 1 passes.
  double worstRatio = 0.0;
  std::size_t pairs = 0;
  bool pass = false;
};

/// C1 = max |g(y)^k - g(x)^k| / |y - x| over the pairs, then checks
/// |g(y) - g(x)| <= 2k C1^(1/k) |y - x|^(1/k) on the same pairs. Pairs are
/// consecutive entries of a deterministic shuffle of the samples.
HolderReport holderCheck(const ComplexField& g, int k, const std::vector<Vec>& samples, std::size_t pairBudget);

// ---------------------------------------------------------------------------
// Half-ball Dirichlet problem

using HalfBallBoundary = std::function<Complex(std::span<const double> x, double t)>;

/// Harmonic H on the upper half ball of radius rho2 around (p, 0) in
/// R^{n+1}, on a uniform grid.
struct HalfBallSolution {
  Vec p;
  double rho2 = 0.0;
  std::size_t n = 0;
  std::size_t gridRes = 0;  // nodes per x axis (odd)
  std::size_t tRes = 0;     // nodes along t
  double h = 0.0;
  std::vector<Complex> values;
  /// 0 outside, 1 interior unknown, 2 flat Dirichlet, 3 curved Dirichlet.
  std::vector<unsigned char> status;
  std::size_t iterations = 0;
  double errorEstimate = 0.0;
  ComplexField flatData;

  std::size_t index(std::span<const std::size_t> ix, std::size_t it) const;
  /// Multilinear interpolation of H at (x, s), s >= 0. In the first layer
  /// s < h the flat data at x is blended with the interpolated H(x, h), so
  /// H(x, 0) equals the flat data exactly.
  Complex interpolate(std::span<const double> x, double s) const;
  /// min Re H over interior nodes more than one cell from (p, 0).
  double minInteriorReal() const;
};

struct HalfBallOptions {
  std::size_t gridRes = 129;
  double tolSolve = 1e-8;
  double omega = 1.9;
  std::size_t maxIterations = 100000;
  std::size_t maxNodes = 2'200'000;
};

/// Second-order finite differences (Shortley-Weller at the curved boundary)
/// with red-black SOR on Re and Im. Stops when the geometric error estimate
/// d_k rho/(1 - rho), rho = d_k/d_{k-1}, drops below tolSolve; NoConvergence
/// after maxIterations.
HalfBallSolution dirichletHalfBall(const ComplexField& flatData, const HalfBallBoundary& hemisphereData,
                                   std::span<const double> p, double rho2, const HalfBallOptions& options = {});

// ---------------------------------------------------------------------------
// Assembly

/// F(x, t) = H(x, t^2)^k / m(x).
class ExtensionField {
 public:
  ExtensionField() = default;
  ExtensionField(std::shared_ptr<const HalfBallSolution> H, int k, ComplexField multiplier, double rho6);

  /// Throws RadiusOutOfDomain when (x, t^2) leaves the closed half ball and
  /// MultiplierUnderflow when |m(x)| < 1e-12.
  Vec evaluate(std::span<const double> x, double t) const;
  Complex evaluateH2(std::span<const double> x, double t) const;
  HomotopyFn asFunction() const;
  double rho6() const noexcept { return rho6_; }
  int k() const noexcept { return k_; }
  const HalfBallSolution& H() const noexcept { return *H_; }

 private:
  std::shared_ptr<const HalfBallSolution> H_;
  int k_ = 1;
  ComplexField m_;
  double rho6_ = 0.0;
};

struct ExtensionReport {
  double maxRelativeT0Error = 0.0;
  std::vector<double> shellRadii;
  std::vector<double> shellMinima;
  double C = 0.0;
  double C3Observed = 0.0;
  Report checks;
};

ExtensionField assembleExtension(std::shared_ptr<const HalfBallSolution> H, int k, const ComplexField& multiplier,
                                 double rho6);
/// t = 0 agreement with f on shells [0.1, 1] rho6, min |F| per (x, t) shell,
/// C = max |F| / |(x - p, t)|, and |H(x, t^2)| <= C3 |(x, t)|^(1/k).
ExtensionReport checkExtension(const ExtensionField& F, const PolyMap& f, double C3, std::size_t perShell = 400);

// ---------------------------------------------------------------------------
// Pipeline

struct AnalyticOptions {
  double isolationRadius = 0.8;
  /// Nodes per x axis of the half-ball grid; 0 picks 129 for n = 2 and 33
  /// for n = 3.
  std::size_t gridRes = 0;
  double tolSolve = 1e-8;
  int liftLevel = 3;
  std::size_t holderPairs = 10000;
  /// ThetaUnbounded / k selection uses a second lift one level finer.
  bool refineCheck = true;
};

struct AnalyticResult {
  double rho2 = 0.0, rho3 = 0.0, rho6 = 0.0;
  int winding = 0;
  InessentialVerdict verdict;
  std::shared_ptr<const AngleLift> sphereLift;
  std::shared_ptr<const BoundaryMultiplier> multiplier;
  std::shared_ptr<const AngleLift> polar;
  double supTheta = 0.0;
  int k = 1;
  std::shared_ptr<const RootField> root;
  HolderReport holder;
  std::shared_ptr<const HalfBallSolution> H;
  ExtensionField F;
  ExtensionReport extension;
  Report checks;

  nlohmann::json manifest() const;
};

/// Runs the construction for q = 2, n in {2, 3} around p with radii
/// rho2 = R/2, rho3 = min(1.2 rho2, R), rho6 = 0.8 rho2.
AnalyticResult runAnalyticPipeline(const PolyMap& f, std::span<const double> p, const AnalyticOptions& options = {});

}  // namespace isozero

#pragma once

#include "isozero/geometry.hpp"
#include "isozero/polynomial.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace isozero {

/// Grid-plus-Lipschitz evidence that a map has no zero on the closed shell
/// innerRadius <= |x - center| <= outerRadius. An inner radius of 0 covers
/// the whole ball.
///
/// VALID (certifiedLowerBound > 0) is a proof at machine precision. INVALID
/// is inconclusive.
struct AnnulusCertificate {
  std::string mapId;
  Vec center;
  double innerRadius = 0.0;
  double outerRadius = 0.0;
  /// Uniform: the grid spacing. Adaptive: the finest cell side used.
  double gridStep = 0.0;
  /// Smallest |f| at the sample points.
  double minSampled = 0.0;
  /// Uniform: the global bound. Adaptive: the largest local bound used.
  double lipschitz = 0.0;
  double certifiedLowerBound = 0.0;
  std::size_t samples = 0;
  /// "uniform" or "adaptive".
  std::string method = "uniform";
  /// Center of the worst cell or sample (where the bound was attained).
  Vec worstPoint;

  bool valid() const noexcept { return certifiedLowerBound > 0.0; }
  nlohmann::json toJson() const;
};

/// Uniform cubical grid of step h. Grid points are taken from the shell
/// dilated by h*sqrt(n)/2, so every shell point lies within h*sqrt(n)/2 of a
/// sample; L is lipschitzBound on the dilated outer ball and
/// certifiedLowerBound = mu - L*h*sqrt(n)/2.
AnnulusCertificate certifyNonvanishingAnnulus(const PolyMap& map, std::span<const double> center, double r0,
                                              double R, double h, const std::string& mapId = "");

/// Recomputes the minimum of |f| over the uniform grid a certificate used.
double recomputeGridMinimum(const PolyMap& map, const AnnulusCertificate& cert);

struct AdaptiveOptions {
  /// Side of the initial cells covering the bounding cube.
  double initialStep = 0.25;
  /// Cells are not split below this side; such a cell fails the certificate.
  double minStep = 1e-7;
  std::size_t maxCells = 200'000'000;
};

/// Cell bisection with local Taylor-based Lipschitz bounds. A cell of
/// circumradius rho around c is cleared when
///   max(|f(c)| - L rho, max_i |f_i(c)| - L_i rho) > 0,
/// otherwise it is split. The certified bound is the minimum over cleared
/// cells.
AnnulusCertificate certifyNonvanishingAdaptive(const PolyMap& map, std::span<const double> center, double r0,
                                               double R, const AdaptiveOptions& options = {},
                                               const std::string& mapId = "");

struct ZeroWitness {
  Vec point;
  double residual = 0.0;
  int iterations = 0;
  std::size_t startIndex = 0;
};

struct SearchRegion {
  BallSpec ball;
  /// Witnesses closer than this to the center are rejected.
  double innerRadius = 0.0;
};

/// Damped Gauss-Newton (minimum-norm steps, Armijo backtracking on |f|^2,
/// at most 100 iterations) from Halton starts in the ball. Returns the first
/// witness inside the region with residual < tol, or nullopt.
std::optional<ZeroWitness> findZeroMultistart(const PolyMap& map, const SearchRegion& region,
                                              std::size_t numStarts, double tol);
std::optional<ZeroWitness> findZeroMultistart(const PolyMap& map, const BallSpec& ball, std::size_t numStarts,
                                              double tol);

}  // namespace isozero

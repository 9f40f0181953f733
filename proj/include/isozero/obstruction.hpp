#pragma once

#include "isozero/certification.hpp"
#include "isozero/geometry.hpp"
#include "isozero/polynomial.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace isozero {

enum class VerdictStatus { InessentialAlways, InessentialDegreeZero, Essential, Unknown };

const char* toString(VerdictStatus status);

struct InessentialVerdict {
  VerdictStatus status = VerdictStatus::Unknown;
  /// Degree or winding number when one was computed.
  std::optional<int> invariant;
  std::string rule;
  std::vector<std::string> citations;

  bool inessential() const noexcept {
    return status == VerdictStatus::InessentialAlways || status == VerdictStatus::InessentialDegreeZero;
  }
  nlohmann::json toJson() const;
};

/// Winding number of a planar map around the circle, by adaptive angle
/// accumulation: each arc is bisected until its argument increment is below
/// tolAngle. Throws ZeroOnSphere when |f| < 1e-12 at a sample.
int windingNumber(const Field& f, const BallSpec& circle, double tolAngle = 1.5707963267948966);
int windingNumber(const PolyMap& map, const BallSpec& circle, double tolAngle = 1.5707963267948966);

struct DegreeResult {
  int degree = 0;
  /// |raw - degree| where raw is the unrounded estimate (0 for n <= 2).
  double residual = 0.0;
  int meshLevel = 0;
};

/// Brouwer degree of f/|f| on the sphere for q = n in {1, 2, 3}.
/// n = 3: summed signed solid angles of the image triangles over 4 pi. The
/// mesh is refined from startLevel until every image triangle has chord
/// diameter < 1 and the snap residual is < 0.1; MeshTooCoarse past maxLevel.
DegreeResult brouwerDegree(const Field& f, const BallSpec& sphere, std::size_t n, int startLevel = 1,
                           int maxLevel = 6);
DegreeResult brouwerDegree(const PolyMap& map, const BallSpec& sphere, int startLevel = 1, int maxLevel = 6);
/// Degree on a fixed mesh (no refinement); MeshTooCoarse when the mesh fails.
DegreeResult brouwerDegree(const Field& f, const SphereMesh& mesh);

/// Verdict for the zero at ball.center. The certificate must be VALID and
/// cover the sphere of radius ball.radius; otherwise NoCertificate.
InessentialVerdict classifyInessential(const PolyMap& map, const BallSpec& ball, const AnnulusCertificate& cert);
/// Same, computing an adaptive certificate on [R/20, R] first.
InessentialVerdict classifyInessential(const PolyMap& map, const BallSpec& ball);

/// Continuous argument of a planar map over a node graph. theta is the
/// absolute argument: exp(logModulus + i theta) reproduces f at the nodes,
/// and theta at the basepoint is Arg f there (0 once f is normalized to 1).
struct AngleLift {
  BallSpec ball;
  std::vector<Vec> nodes;
  std::vector<std::array<std::size_t, 2>> edges;
  Vec theta;
  Vec logModulus;
  std::size_t basepointIndex = 0;
  Field field;

  /// theta at an arbitrary point of the sampled region: nearest node, then
  /// the adaptive path lift along the segment to x.
  double thetaAt(std::span<const double> x) const;
  double maxAbsTheta() const;
};

/// Lift over an arbitrary node graph. Edge paths interpolate radius and
/// direction around ball.center, so sphere edges stay on their sphere and
/// radial edges stay radial. Disconnected components are seeded with their
/// principal argument.
AngleLift buildAngleLiftOnGraph(const Field& f, const BallSpec& ball, std::vector<Vec> nodes,
                                std::vector<std::array<std::size_t, 2>> edges, std::size_t basepointIndex);

/// Lift over a sphere mesh. The basepoint is the node nearest to
/// center + radius * e1. For n = 2 a nonzero winding throws
/// CycleObstruction(winding). A non-tree edge mismatch >= pi/2 triggers one
/// retry on the next refinement level, then InconsistentLift.
AngleLift buildAngleLift(const Field& f, const SphereMesh& mesh);
AngleLift buildAngleLift(const PolyMap& map, const SphereMesh& mesh);

/// phi(x, u) = exp((1 - u) log f(x) + u log c) on S(p, delta/2), c on the
/// positive real axis (q = 2) or with the sign of f (q = 1).
class SphereNullHomotopy {
 public:
  SphereNullHomotopy() = default;
  SphereNullHomotopy(const PolyMap& f, std::optional<AngleLift> lift, BallSpec sphere, Vec c, double epsilon);

  Vec evaluate(std::span<const double> x, double u) const;
  HomotopyFn asFunction() const;

  const BallSpec& sphere() const noexcept { return sphere_; }
  const Vec& targetConstant() const noexcept { return c_; }
  double epsilon() const noexcept { return epsilon_; }
  const std::optional<AngleLift>& lift() const noexcept { return lift_; }
  /// Sampled sup of |f| over the lift nodes (or sphere samples for q = 1).
  double nodeSup() const noexcept { return nodeSup_; }
  double nodeMin() const noexcept { return nodeMin_; }

 private:
  std::shared_ptr<const PolyMap> f_;
  std::optional<AngleLift> lift_;
  BallSpec sphere_;
  Vec c_;
  double epsilon_ = 0.0;
  double nodeSup_ = 0.0;
  double nodeMin_ = 0.0;
};

/// Null-homotopy of f on S(p, delta/2) inside the punctured ball of radius
/// epsilon/2. mesh must sample that sphere (ignored for q = 1). Supported:
/// q = 1 any n, q = 2 with n <= 3. Throws NotConstructive otherwise and
/// SupNormTooLarge when sampled sup |f| >= epsilon/2.
SphereNullHomotopy buildNullHomotopy(const PolyMap& f, std::span<const double> p, double delta, double epsilon,
                                     const SphereMesh& mesh);

/// Two-piece radial transport from S(p, r) to S(p, r0) followed by phi:
/// u <= 1/2 evaluates f(p + (1 + 2(r0/r - 1)u)(x - p)), u >= 1/2 evaluates
/// phi(p + (r0/r)(x - p), 2u - 1).
HomotopyFn radialReparametrize(const Field& f, const HomotopyFn& phi, std::span<const double> p, double r0,
                               double r);

/// Psi = gamma(u) phi with gamma linear from 1 to epsilon/(2M) on [0, delta2]
/// and constant after. Returns phi itself when M < epsilon or delta2 >= 1.
HomotopyFn clampScale(const HomotopyFn& phi, double epsilon, double M, double delta2);

/// Extension of Psi_r on S(p, r) to the punctured ball: u <= 1/2 pushes x
/// radially out to the sphere, u >= 1/2 runs Psi_r on the radial projection.
/// Throws EvaluationAtCenter at x = p.
HomotopyFn coneExtend(const Field& f, const HomotopyFn& psi, std::span<const double> p, double r);

/// Sampled max of |phi| over points x u-grid.
double sampledMaxNorm(const HomotopyFn& phi, const std::vector<Vec>& points, std::size_t uSteps);

struct ConeHomotopyData {
  HomotopyFn theta;
  Vec endpoint;
  double minNorm = 0.0;
  double maxNorm = 0.0;
  std::size_t samples = 0;
  bool withinEpsilon = false;
};

/// From a family F(x, t) on B(p, r0) x [0, 1] with F(., 0) = f, builds
/// Theta_r(x, u) = F(p + (1 - u)(x - p), (delta/2) u) on the punctured
/// ball of radius r and samples it. Throws ZeroDetected if a sample with
/// positive time vanishes.
ConeHomotopyData certificateFromHomotopy(const HomotopyFn& F, std::span<const double> p, double r, double delta,
                                         double epsilon, std::size_t pointSamples = 2000,
                                         std::size_t timeSamples = 21);

}  // namespace isozero

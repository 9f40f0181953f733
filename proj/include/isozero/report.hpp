#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace isozero {

/// Fixed vocabulary for the inequalities the constructions promise. Every
/// numeric check carries one of these.
enum class CheckTag {
  FixedOutsideBall,      // g = f away from the perturbation ball
  CloseToOriginal,       // sup |g - f| < epsilon
  NonvanishingInBall,    // no zero of g in B(p, R)
  ShellCloseness,        // |f - g0| < m/2 on the blend shell
  FitSupError,           // |h - g0| < m/2 on the closed ball
  BlendLowerBound,       // |g| > m/2 on the closed ball
  BlendUpperBound,       // |g| < epsilon/2 on the closed ball
  SeamContinuity,        // homotopy pieces agree on their common boundary
  InnerLowerBound,       // |F0(x, t)| >= (2t/delta)(m/2) inside |x| < t^2/2
  HomotopyUpperBound,    // |F0(x, t)| < eps1/2 on the delta/2 ball
  TimeZeroIdentity,      // F(., 0) = f
  SliceNonvanishing,     // F(., t) has no zero in B(p, R) for t > 0
  ContinuityAtOrigin,    // |F0| < eps2 near (p, 0)
  RootHalfPlane,         // Re (m f)^(1/k) >= 0
  HolderBound,           // |g(y) - g(x)| <= 2k C1^(1/k) |y - x|^(1/k)
  BoundaryAgreement,     // F(x, 0) matches f
  ConeLinearBound,       // |F(x, t)| <= C |(x - p, t)|
  ShellMinimumPositive,  // min |F| on (x, t) shells > 0
  RootBoundaryBound,     // |H(x, t^2)| <= C3 |(x, t)|^(1/k)
  HarmonicPositivity,    // Re H > 0 at interior nodes
  IsolationCertificate,  // annulus certificate is VALID
  ZeroWitnessFound,      // Newton oracle found a common zero
  NormIdentity,          // |f(x)| = |x|^2 for the Hopf map
  Verdict,               // classification outcome
};

const char* toString(CheckTag tag);

struct Check {
  std::string name;
  CheckTag tag = CheckTag::Verdict;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string note;

  nlohmann::json toJson() const;
};

struct Report {
  std::vector<Check> checks;

  void add(std::string name, CheckTag tag, double value, double bound, bool pass, std::string note = "");
  bool allPass() const;
  const Check* find(const std::string& name) const;
  nlohmann::json toJson() const;
};

}  // namespace isozero

#include "isozero/report.hpp"

#include <algorithm>
#include <cmath>

namespace isozero {

const char* toString(CheckTag tag) {
  switch (tag) {
    case CheckTag::FixedOutsideBall: return "fixed-outside-ball";
    case CheckTag::CloseToOriginal: return "close-to-original";
    case CheckTag::NonvanishingInBall: return "nonvanishing-in-ball";
    case CheckTag::ShellCloseness: return "shell-closeness";
    case CheckTag::FitSupError: return "fit-sup-error";
    case CheckTag::BlendLowerBound: return "blend-lower-bound";
    case CheckTag::BlendUpperBound: return "blend-upper-bound";
    case CheckTag::SeamContinuity: return "seam-continuity";
    case CheckTag::InnerLowerBound: return "inner-lower-bound";
    case CheckTag::HomotopyUpperBound: return "homotopy-upper-bound";
    case CheckTag::TimeZeroIdentity: return "time-zero-identity";
    case CheckTag::SliceNonvanishing: return "slice-nonvanishing";
    case CheckTag::ContinuityAtOrigin: return "continuity-at-origin";
    case CheckTag::RootHalfPlane: return "root-half-plane";
    case CheckTag::HolderBound: return "holder-bound";
    case CheckTag::BoundaryAgreement: return "boundary-agreement";
    case CheckTag::ConeLinearBound: return "cone-linear-bound";
    case CheckTag::ShellMinimumPositive: return "shell-minimum-positive";
    case CheckTag::RootBoundaryBound: return "root-boundary-bound";
    case CheckTag::HarmonicPositivity: return "harmonic-positivity";
    case CheckTag::IsolationCertificate: return "isolation-certificate";
    case CheckTag::ZeroWitnessFound: return "zero-witness-found";
    case CheckTag::NormIdentity: return "norm-identity";
    case CheckTag::Verdict: return "verdict";
  }
  return "unknown";
}

namespace {

// JSON has no infinities; report them as strings.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json Check::toJson() const {
  nlohmann::json j{{"name", name}, {"tag", toString(tag)}, {"value", number(value)}, {"bound", number(bound)},
                   {"pass", pass}};
  if (!note.empty()) j["note"] = note;
  return j;
}

void Report::add(std::string name, CheckTag tag, double value, double bound, bool pass, std::string note) {
  checks.push_back({std::move(name), tag, value, bound, pass, std::move(note)});
}

bool Report::allPass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* Report::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json Report::toJson() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back(c.toJson());
  return {{"allPass", allPass()}, {"checks", arr}};
}

}  // namespace isozero

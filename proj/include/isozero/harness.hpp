#pragma once

#include "isozero/obstruction.hpp"
#include "isozero/polynomial.hpp"
#include "isozero/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace isozero {

enum class PipelineKind { Analyze, Perturb, Homotopy, Analytic2, Example };

const char* toString(PipelineKind kind);
PipelineKind pipelineFromString(const std::string& s);

/// Input document. JSON layout (schemaVersion 1):
///   { "schemaVersion": 1, "name": "...", "pipeline": "analyze",
///     "map": <PolyMap JSON>, "point": [..], "radius": R,
///     "homotopy": <PolyMap JSON in n + 1 variables, optional>,
///     "tolerances": { ... overrides ... } }
struct ProblemSpec {
  int schemaVersion = 1;
  std::string name;
  PipelineKind pipeline = PipelineKind::Analyze;
  PolyMap map;
  Vec point;
  double radius = 1.0;
  std::optional<PolyMap> homotopy;
  nlohmann::json tolerances = nlohmann::json::object();

  static ProblemSpec fromJson(const nlohmann::json& j);
  nlohmann::json toJson() const;

  double tol(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;
};

ProblemSpec loadProblem(const std::filesystem::path& path);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// Output document. Timings are kept out of toJson() so that two runs with
/// the same configuration serialize identically; they go to a separate file.
struct RunReport {
  std::string pipeline;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json verdict = nullptr;
  std::vector<nlohmann::json> certificates;
  Report checks;
  std::vector<std::string> artifacts;
  std::vector<std::string> stageErrors;
  nlohmann::json details = nlohmann::json::object();
  std::vector<StageTiming> timings;

  nlohmann::json toJson() const;
  nlohmann::json timingsJson() const;
  /// 1 on a stage error or a failed check, 2 when the verdict is negative
  /// (Essential or Unknown), 0 otherwise.
  int exitCode() const;
  std::string configHash() const;
};

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1aHex(const std::string& bytes);

/// Writes report.json, manifest.json (config hash, artifacts) and
/// timings.json into dir.
void writeRunArtifacts(const RunReport& report, const std::filesystem::path& dir);

/// Certificate on [inner, R] (tolerance keys: innerFraction = 0.05,
/// gridStep = 0.25 initial cell), classification, and a Newton search for a
/// stray zero in the annulus (starts = 64).
RunReport runAnalyze(const ProblemSpec& spec);

/// Null-homotopy, piecewise perturbation g and its verification. Keys: rho
/// (R/2), epsilon (0.1), meshLevel (3); blend = 1 adds the polynomial fit
/// and cutoff blend (fitDegree = 12).
RunReport runPerturb(const ProblemSpec& spec);

/// build: perturbation then the Alexander homotopy with its inequality
/// suite and slice checks at `times`. verify: slice certificates of the
/// spec's polynomial homotopy at `times`.
RunReport runHomotopy(const ProblemSpec& spec, bool buildMode, const std::filesystem::path& outDir = {});

/// n = 1: complexification (rho0 = 0.9 R). n in {2, 3}: the half-ball
/// construction (grid, tolSolve). Writes H_grid.bin and analytic.json when
/// outDir is non-empty.
RunReport runAnalytic2(const ProblemSpec& spec, const std::filesystem::path& outDir = {});

/// The cone / umbrella example: analysis, perturbation, constructed
/// homotopy, the explicit polynomial homotopy at the slice times, and the
/// translation and level-set sweeps.
RunReport runExampleConeUmbrella(const nlohmann::json& overrides = nlohmann::json::object());
/// The Hopf map R^4 -> R^3: certificate, norm identity, verdict.
RunReport runExampleHopf(const nlohmann::json& overrides = nlohmann::json::object());

/// Built-in maps.
PolyMap coneUmbrellaMap();
/// 8x^2 + 8y^2 - z^2 + t^2, z(x^2 + y^2) + z t^2 - x^3 in (x, y, z, t).
PolyMap coneUmbrellaHomotopy();
PolyMap hopfMap();

/// Dispatches on spec.pipeline (example needs tolerances.example).
RunReport runProblem(const ProblemSpec& spec, const std::filesystem::path& outDir = {});

}  // namespace isozero

#include "isozero/harness.hpp"

#include "isozero/alexander.hpp"
#include "isozero/analytic.hpp"
#include "isozero/certification.hpp"
#include "isozero/error.hpp"
#include "isozero/export.hpp"
#include "isozero/perturbation.hpp"
#include "isozero/rational.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace isozero {

namespace {

using Clock = std::chrono::steady_clock;

// Runs one stage, recording its wall time and turning exceptions into stage
// errors so later stages still run.
bool stage(RunReport& rep, const std::string& name, const std::function<void()>& body) {
  const auto start = Clock::now();
  bool ok = true;
  try {
    body();
  } catch (const Error& e) {
    rep.stageErrors.push_back(name + ": " + e.what());
    ok = false;
  } catch (const std::exception& e) {
    rep.stageErrors.push_back(name + ": " + e.what());
    ok = false;
  }
  rep.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
  return ok;
}

void append(Report& into, const Report& from, const std::string& prefix) {
  for (Check c : from.checks) {
    c.name = prefix + c.name;
    into.checks.push_back(std::move(c));
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

SparsePolynomial poly(std::size_t n, const std::vector<std::pair<std::string, Exponent>>& terms) {
  return SparsePolynomial::fromTerms(n, terms);
}

nlohmann::json witnessJson(const ZeroWitness& w) {
  return {{"point", w.point}, {"residual", w.residual}, {"iterations", w.iterations}, {"start", w.startIndex}};
}

void recordCertificate(RunReport& rep, const AnnulusCertificate& cert, const std::string& checkName) {
  rep.certificates.push_back(cert.toJson());
  rep.checks.add(checkName, CheckTag::IsolationCertificate, cert.certifiedLowerBound, 0.0, cert.valid(),
                 cert.method + " certificate on [" + fmt(cert.innerRadius) + ", " + fmt(cert.outerRadius) + "]");
}

void recordVerdict(RunReport& rep, const InessentialVerdict& v) {
  rep.verdict = v.toJson();
  rep.checks.add("verdict", CheckTag::Verdict, v.invariant ? *v.invariant : 0.0, 0.0, true,
                 std::string(toString(v.status)) + " (" + v.rule + ")");
}

void analyzeStages(RunReport& rep, const PolyMap& f, const Vec& p, double R, double innerFraction, double gridStep,
                   std::size_t starts) {
  AnnulusCertificate cert;
  const bool certified = stage(rep, "certificate", [&] {
    AdaptiveOptions opts;
    opts.initialStep = gridStep;
    cert = certifyNonvanishingAdaptive(f, p, innerFraction * R, R, opts, "f");
    recordCertificate(rep, cert, "isolation certificate");
  });
  if (certified)
    stage(rep, "classify", [&] {
      // classifyInessential needs a certificate reaching the sphere radius;
      // it is the one above.
      recordVerdict(rep, classifyInessential(f, BallSpec(p, R), cert));
    });
  stage(rep, "stray-zero search", [&] {
    const auto w = findZeroMultistart(f, SearchRegion{BallSpec(p, R), innerFraction * R}, starts, 1e-10);
    rep.checks.add("no Newton zero in the annulus", CheckTag::ZeroWitnessFound, w ? w->residual : 0.0, 0.0, !w,
                   w ? "witness found" : std::to_string(starts) + " starts converged to no zero");
    if (w) rep.details["strayZero"] = witnessJson(*w);
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Problem spec

const char* toString(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::Analyze: return "analyze";
    case PipelineKind::Perturb: return "perturb";
    case PipelineKind::Homotopy: return "homotopy";
    case PipelineKind::Analytic2: return "analytic2";
    case PipelineKind::Example: return "example";
  }
  return "analyze";
}

PipelineKind pipelineFromString(const std::string& s) {
  for (auto k : {PipelineKind::Analyze, PipelineKind::Perturb, PipelineKind::Homotopy, PipelineKind::Analytic2,
                 PipelineKind::Example})
    if (s == toString(k)) return k;
  throw Error(ErrorKind::ParseError, "unknown pipeline '" + s + "'");
}

ProblemSpec ProblemSpec::fromJson(const nlohmann::json& j) {
  ProblemSpec s;
  try {
    s.schemaVersion = j.value("schemaVersion", 1);
    if (s.schemaVersion != 1) throw Error(ErrorKind::ParseError, "unsupported schemaVersion");
    s.name = j.value("name", std::string());
    s.pipeline = pipelineFromString(j.value("pipeline", std::string("analyze")));
    s.map = polyMapFromJson(j.at("map"));
    s.point = j.contains("point") ? j.at("point").get<Vec>() : Vec(s.map.n(), 0.0);
    s.radius = j.value("radius", 1.0);
    if (j.contains("homotopy") && !j.at("homotopy").is_null()) s.homotopy = polyMapFromJson(j.at("homotopy"));
    if (j.contains("tolerances")) s.tolerances = j.at("tolerances");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (s.point.size() != s.map.n()) throw Error(ErrorKind::DimensionMismatch, "point dimension != map n");
  if (!(s.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  if (!s.tolerances.is_object()) throw Error(ErrorKind::ParseError, "tolerances must be an object");
  if (s.homotopy && s.homotopy->n() != s.map.n() + 1)
    throw Error(ErrorKind::DimensionMismatch, "homotopy needs n + 1 variables");
  return s;
}

nlohmann::json ProblemSpec::toJson() const {
  nlohmann::json j{{"schemaVersion", schemaVersion},
                   {"name", name},
                   {"pipeline", toString(pipeline)},
                   {"map", isozero::toJson(map)},
                   {"point", point},
                   {"radius", radius},
                   {"tolerances", tolerances}};
  if (homotopy) j["homotopy"] = isozero::toJson(*homotopy);
  return j;
}

double ProblemSpec::tol(const std::string& key, double fallback) const {
  return tolerances.contains(key) ? tolerances.at(key).get<double>() : fallback;
}

std::size_t ProblemSpec::count(const std::string& key, std::size_t fallback) const {
  return tolerances.contains(key) ? tolerances.at(key).get<std::size_t>() : fallback;
}

std::vector<double> ProblemSpec::list(const std::string& key, const std::vector<double>& fallback) const {
  return tolerances.contains(key) ? tolerances.at(key).get<std::vector<double>>() : fallback;
}

ProblemSpec loadProblem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string());
  try {
    return ProblemSpec::fromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

// ---------------------------------------------------------------------------
// Run report

std::string fnv1aHex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunReport::configHash() const { return fnv1aHex(config.dump()); }

nlohmann::json RunReport::toJson() const {
  return {{"schemaVersion", 1},
          {"pipeline", pipeline},
          {"configHash", configHash()},
          {"config", config},
          {"verdict", verdict},
          {"certificates", certificates},
          {"checks", checks.toJson()},
          {"artifacts", artifacts},
          {"stageErrors", stageErrors},
          {"details", details},
          {"exitCode", exitCode()}};
}

nlohmann::json RunReport::timingsJson() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : timings) j.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  return {{"configHash", configHash()}, {"timings", j}};
}

int RunReport::exitCode() const {
  if (!stageErrors.empty() || !checks.allPass()) return 1;
  if (verdict.is_object()) {
    const auto status = verdict.value("status", std::string());
    if (status == "Essential" || status == "Unknown") return 2;
  }
  return 0;
}

void writeRunArtifacts(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const nlohmann::json& j) {
    std::ofstream out(dir / file);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + (dir / file).string());
    out << j.dump(2) << '\n';
  };
  write("report.json", report.toJson());
  write("manifest.json", {{"schemaVersion", 1},
                          {"pipeline", report.pipeline},
                          {"configHash", report.configHash()},
                          {"files", [&] {
                             auto files = report.artifacts;
                             files.insert(files.begin(), {"report.json", "timings.json"});
                             return files;
                           }()}});
  write("timings.json", report.timingsJson());
}

// ---------------------------------------------------------------------------
// Built-in maps

PolyMap coneUmbrellaMap() {
  return PolyMap(3, {poly(3, {{"8", {2, 0, 0}}, {"8", {0, 2, 0}}, {"-1", {0, 0, 2}}}),
                     poly(3, {{"1", {2, 0, 1}}, {"1", {0, 2, 1}}, {"-1", {3, 0, 0}}})});
}

PolyMap coneUmbrellaHomotopy() {
  return PolyMap(4, {poly(4, {{"8", {2, 0, 0, 0}}, {"8", {0, 2, 0, 0}}, {"-1", {0, 0, 2, 0}}, {"1", {0, 0, 0, 2}}}),
                     poly(4, {{"1", {2, 0, 1, 0}}, {"1", {0, 2, 1, 0}}, {"1", {0, 0, 1, 2}}, {"-1", {3, 0, 0, 0}}})});
}

PolyMap hopfMap() {
  // (a, b, c, d) = (Re z1, Im z1, Re z2, Im z2):
  // 2 z1 conj(z2) = (2(ac + bd), 2(bc - ad)), |z1|^2 - |z2|^2.
  return PolyMap(4, {poly(4, {{"2", {1, 0, 1, 0}}, {"2", {0, 1, 0, 1}}}),
                     poly(4, {{"2", {0, 1, 1, 0}}, {"-2", {1, 0, 0, 1}}}),
                     poly(4, {{"1", {2, 0, 0, 0}}, {"1", {0, 2, 0, 0}}, {"-1", {0, 0, 2, 0}}, {"-1", {0, 0, 0, 2}}})});
}

// ---------------------------------------------------------------------------
// Pipelines

RunReport runAnalyze(const ProblemSpec& spec) {
  RunReport rep;
  rep.pipeline = "analyze";
  rep.config = spec.toJson();
  analyzeStages(rep, spec.map, spec.point, spec.radius, spec.tol("innerFraction", 0.05), spec.tol("gridStep", 0.25),
                spec.count("starts", 64));
  return rep;
}

namespace {

std::optional<PiecewiseRadialMap> perturbStages(RunReport& rep, const ProblemSpec& spec) {
  const double R = spec.radius;
  const double rho = spec.tol("rho", R / 2.0);
  const double eps = spec.tol("epsilon", 0.1);
  std::optional<PiecewiseRadialMap> g;
  stage(rep, "perturbation", [&] {
    g = buildPerturbationAuto(spec.map, spec.point, R, rho, eps, static_cast<int>(spec.count("meshLevel", 3)));
    rep.details["perturbation"] = {{"delta", g->delta()}, {"m", g->m()}, {"epsilon", g->epsilon()}, {"c", g->c()}};
  });
  if (!g) return g;
  stage(rep, "verify perturbation", [&] {
    append(rep.checks, verifyPerturbation(g->asField(), spec.map, spec.point, rho, R, eps), "g: ");
  });
  return g;
}

}  // namespace

RunReport runPerturb(const ProblemSpec& spec) {
  RunReport rep;
  rep.pipeline = "perturb";
  rep.config = spec.toJson();
  auto g = perturbStages(rep, spec);
  if (g && spec.count("blend", 0) != 0) {
    stage(rep, "blend", [&] {
      const double delta1 = chooseBlendRadius(*g);
      const auto fit = fitPolynomialOnBall(g->asField(), spec.map.q(), BallSpec(g->p(), g->delta() / 2.0),
                                           g->m() / 2.0, static_cast<int>(spec.count("fitDegree", 12)));
      const auto blended = blendWithCutoff(*g, fit.h, delta1);
      append(rep.checks, blended.report(), "blend: ");
      rep.details["blend"] = {{"delta1", delta1}, {"fitDegree", fit.degree}, {"fitSupError", fit.supError}};
    });
  }
  return rep;
}

RunReport runHomotopy(const ProblemSpec& spec, bool buildMode, const std::filesystem::path& outDir) {
  RunReport rep;
  rep.pipeline = buildMode ? "homotopy-build" : "homotopy-verify";
  rep.config = spec.toJson();
  rep.config["mode"] = buildMode ? "build" : "verify";
  const auto times = spec.list("times", {0.05, 0.1, 0.2, 0.5});
  if (!buildMode) {
    stage(rep, "slice certificates", [&] {
      if (!spec.homotopy) throw Error(ErrorKind::InvalidArgument, "verify needs a polynomial homotopy in the spec");
      append(rep.checks,
             verifyNonvanishingFamily(*spec.homotopy, spec.point, spec.radius, times, spec.tol("gridStep", 0.25)),
             "");
    });
    return rep;
  }
  auto g = perturbStages(rep, spec);
  if (!g) return rep;
  stage(rep, "alexander homotopy", [&] {
    const auto F = buildAlexanderHomotopy(spec.map, *g, spec.point, g->delta(), g->m());
    rep.details["homotopy"] = {{"delta", F.delta()}, {"m", F.m()}, {"epsilon1", F.epsilon1()},
                               {"seamError", F.seamError()}};
    append(rep.checks, verifyAlexanderInequalities(F), "F: ");
    append(rep.checks, verifyNonvanishingFamily(F, spec.radius, spec.list("alexanderTimes", {0.5, 1.0})), "F: ");
    if (!outDir.empty() && spec.map.n() == 3 && spec.count("export", 0) != 0) {
      const double r = g->delta();
      SliceGrid grid{{spec.point[0] - r, spec.point[1] - r, spec.point[2] - r},
                     {spec.point[0] + r, spec.point[1] + r, spec.point[2] + r},
                     spec.count("exportGrid", 33)};
      for (const auto& path : exportSlices(F.asFunction(), spec.list("exportTimes", {0.0, 1.0}), grid, outDir, "F"))
        rep.artifacts.push_back(path.filename().string());
    }
  });
  return rep;
}

RunReport runAnalytic2(const ProblemSpec& spec, const std::filesystem::path& outDir) {
  RunReport rep;
  rep.pipeline = "analytic2";
  rep.config = spec.toJson();
  const auto& f = spec.map;
  if (f.n() == 1) {
    stage(rep, "complexify", [&] {
      const double rho0 = spec.tol("rho0", 0.9 * spec.radius);
      const auto F = complexify1d(f, rho0);
      nlohmann::json coeffs = nlohmann::json::array(), inside = nlohmann::json::array();
      for (auto c : F.coefficients) coeffs.push_back({c.real(), c.imag()});
      for (auto z : F.rootsInside) inside.push_back({z.real(), z.imag()});
      rep.details["complexified"] = {{"coefficients", coeffs}, {"rootsInside", inside},
                                     {"distinctRootsInside", F.distinctRootsInside}, {"rho0", rho0}};
      rep.checks.add("one root in the disk", CheckTag::IsolationCertificate,
                     static_cast<double>(F.distinctRootsInside), 1.0, F.distinctRootsInside == 1,
                     "companion-matrix count of distinct roots with |z| < rho0");
    });
    return rep;
  }
  stage(rep, "analytic pipeline", [&] {
    AnalyticOptions opts;
    opts.isolationRadius = spec.radius;
    opts.gridRes = spec.count("grid", 0);
    opts.tolSolve = spec.tol("tolSolve", 1e-8);
    opts.liftLevel = static_cast<int>(spec.count("meshLevel", 3));
    opts.holderPairs = spec.count("holderPairs", 10000);
    const auto res = runAnalyticPipeline(f, spec.point, opts);
    rep.verdict = res.verdict.toJson();
    append(rep.checks, res.checks, "");
    rep.details["analytic"] = res.manifest();
    if (!outDir.empty()) {
      std::filesystem::create_directories(outDir);
      std::ofstream bin(outDir / "H_grid.bin", std::ios::binary);
      for (const auto& v : res.H->values) {
        const double pair[2] = {v.real(), v.imag()};
        bin.write(reinterpret_cast<const char*>(pair), sizeof pair);
      }
      nlohmann::json m = res.manifest();
      m["layout"] = {{"file", "H_grid.bin"},
                     {"encoding", "float64 little-endian (re, im) per node"},
                     {"order", "x1 fastest, then x2.., t slowest"},
                     {"n", res.H->n},
                     {"gridRes", res.H->gridRes},
                     {"tRes", res.H->tRes},
                     {"h", res.H->h},
                     {"p", res.H->p},
                     {"rho2", res.H->rho2}};
      std::ofstream(outDir / "analytic.json") << m.dump(2) << '\n';
      rep.artifacts.push_back("H_grid.bin");
      rep.artifacts.push_back("analytic.json");
    }
  });
  return rep;
}

RunReport runExampleConeUmbrella(const nlohmann::json& overrides) {
  ProblemSpec spec;
  spec.name = "cone-umbrella";
  spec.pipeline = PipelineKind::Example;
  spec.map = coneUmbrellaMap();
  spec.point = {0.0, 0.0, 0.0};
  spec.radius = 1.0;
  spec.homotopy = coneUmbrellaHomotopy();
  spec.tolerances = overrides;
  spec.tolerances["example"] = "cone-umbrella";

  RunReport rep;
  rep.pipeline = "example cone-umbrella";
  rep.config = spec.toJson();
  const Vec& p = spec.point;
  const bool full = spec.count("skipConstruction", 0) == 0;

  analyzeStages(rep, spec.map, p, spec.radius, spec.tol("innerFraction", 0.05), spec.tol("gridStep", 0.25),
                spec.count("starts", 64));

  stage(rep, "explicit homotopy slices", [&] {
    append(rep.checks,
           verifyNonvanishingFamily(*spec.homotopy, p, 1.0, spec.list("times", {0.05, 0.1, 0.2, 0.5}),
                                    spec.tol("gridStep", 0.25)),
           "explicit homotopy: ");
  });

  if (full) {
    auto g = perturbStages(rep, spec);
    if (g)
      stage(rep, "constructed homotopy", [&] {
        const auto F = buildAlexanderHomotopy(spec.map, *g, p, g->delta(), g->m());
        rep.details["homotopy"] = {{"delta", F.delta()}, {"m", F.m()}, {"epsilon1", F.epsilon1()}};
        append(rep.checks, verifyAlexanderInequalities(F), "F: ");
        append(rep.checks, verifyNonvanishingFamily(F, spec.radius, spec.list("alexanderTimes", {0.5, 1.0})),
               "F: ");
      });
  }

  const std::size_t starts = spec.count("sweepStarts", 200);
  const double tol = spec.tol("tol", 1e-10);
  stage(rep, "translation sweep", [&] {
    // f1 fixed, f2's variety translated by tau, |tau| <= 0.1.
    const auto taus = haltonInBall(BallSpec(Vec(3, 0.0), 0.1), spec.count("translations", 20));
    std::size_t found = 0;
    double worst = 0.0;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& tau : taus) {
      const PolyMap f2(3, {spec.map.component(1)});
      const PolyMap moved(3, {spec.map.component(0), shiftMap(f2, tau).component(0)});
      const auto w = findZeroMultistart(moved, BallSpec(p, 1.0), starts, tol);
      if (w) {
        ++found;
        worst = std::max(worst, w->residual);
      }
      list.push_back({{"tau", tau}, {"witness", w ? witnessJson(*w) : nlohmann::json(nullptr)}});
    }
    rep.details["translations"] = list;
    rep.checks.add("translation witnesses", CheckTag::ZeroWitnessFound, static_cast<double>(found),
                   static_cast<double>(taus.size()), found == taus.size(),
                   "max residual " + fmt(worst) + " (bound 1e-8)");
    rep.checks.add("translation witness residual", CheckTag::ZeroWitnessFound, worst, 1e-8, worst < 1e-8);
  });
  stage(rep, "level-set sweep", [&] {
    const std::vector<double> levels{-0.1, -0.05, 0.05, 0.1};
    std::size_t found = 0, total = 0;
    double worst = 0.0;
    nlohmann::json list = nlohmann::json::array();
    for (double c1 : levels)
      for (double c2 : levels) {
        ++total;
        const Vec c{-c1, -c2};
        const auto w = findZeroMultistart(offsetMap(spec.map, c), BallSpec(p, 1.0), starts, tol);
        if (w) {
          ++found;
          worst = std::max(worst, w->residual);
        }
        list.push_back({{"levels", {c1, c2}}, {"witness", w ? witnessJson(*w) : nlohmann::json(nullptr)}});
      }
    rep.details["levelSets"] = list;
    rep.checks.add("level-set witnesses", CheckTag::ZeroWitnessFound, static_cast<double>(found),
                   static_cast<double>(total), found == total, "max residual " + fmt(worst) + " (bound 1e-8)");
    rep.checks.add("level-set witness residual", CheckTag::ZeroWitnessFound, worst, 1e-8, worst < 1e-8);
  });
  return rep;
}

RunReport runExampleHopf(const nlohmann::json& overrides) {
  ProblemSpec spec;
  spec.name = "hopf";
  spec.pipeline = PipelineKind::Example;
  spec.map = hopfMap();
  spec.point = Vec(4, 0.0);
  spec.radius = 1.0;
  spec.tolerances = overrides;
  spec.tolerances["example"] = "hopf";

  RunReport rep;
  rep.pipeline = "example hopf";
  rep.config = spec.toJson();
  const auto& f = spec.map;

  stage(rep, "norm identity", [&] {
    // Exact: sum f_i^2 == (sum x_i^2)^2 as polynomials.
    SparsePolynomial lhs(4), r2(4);
    for (std::size_t i = 0; i < 3; ++i) lhs += f.component(i) * f.component(i);
    for (std::size_t i = 0; i < 4; ++i) r2 += SparsePolynomial::variable(4, i) * SparsePolynomial::variable(4, i);
    const bool exact = lhs == r2 * r2;
    rep.checks.add("|f|^2 = |x|^4 symbolically", CheckTag::NormIdentity, exact ? 0.0 : 1.0, 0.0, exact);
    double worst = 0.0;
    for (const auto& x : haltonInBall(BallSpec(Vec(4, 0.0), 1.0), spec.count("identityPoints", 1000))) {
      const double r = norm(x);
      worst = std::max(worst, std::abs(norm(f.evaluate(x)) - r * r));
    }
    rep.checks.add("|f(x)| = |x|^2 at sample points", CheckTag::NormIdentity, worst, 1e-12, worst <= 1e-12);
  });

  analyzeStages(rep, f, spec.point, spec.radius, spec.tol("innerFraction", 0.05), spec.tol("gridStep", 0.25),
                spec.count("starts", 64));
  rep.details["note"] =
      "S^3 -> S^2 restriction is the Hopf map, which generates pi_3(S^2) = Z; it is not null-homotopic, so no "
      "continuous nonvanishing g close to f exists near the origin.";
  return rep;
}

RunReport runProblem(const ProblemSpec& spec, const std::filesystem::path& outDir) {
  switch (spec.pipeline) {
    case PipelineKind::Analyze: return runAnalyze(spec);
    case PipelineKind::Perturb: return runPerturb(spec);
    case PipelineKind::Homotopy: return runHomotopy(spec, !spec.homotopy, outDir);
    case PipelineKind::Analytic2: return runAnalytic2(spec, outDir);
    case PipelineKind::Example: {
      const std::string which = spec.tolerances.value("example", std::string());
      if (which == "cone-umbrella") return runExampleConeUmbrella(spec.tolerances);
      if (which == "hopf") return runExampleHopf(spec.tolerances);
      throw Error(ErrorKind::InvalidArgument, "tolerances.example must be cone-umbrella or hopf");
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown pipeline");
}

}  // namespace isozero

#include "isozero/export.hpp"
#include "isozero/harness.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace isozero;
using testing::makeMap;
namespace fs = std::filesystem;

namespace {

fs::path scratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("isozero_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::array<double, 3>> readObjVertices(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::array<double, 3>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) != 0) continue;
    std::istringstream ss(line.substr(2));
    std::array<double, 3> v{};
    ss >> v[0] >> v[1] >> v[2];
    out.push_back(v);
  }
  return out;
}

std::size_t countPrefix(const fs::path& path, const std::string& prefix) {
  std::ifstream in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

ProblemSpec specFor(PipelineKind kind, const PolyMap& f, Vec p, double r) {
  ProblemSpec s;
  s.name = "test";
  s.pipeline = kind;
  s.map = f;
  s.point = std::move(p);
  s.radius = r;
  return s;
}

}  // namespace

TEST_CASE("problem spec round trip") {
  ProblemSpec s = specFor(PipelineKind::Homotopy, coneUmbrellaMap(), Vec{0.1, -0.2, 0.3}, 0.75);
  s.homotopy = coneUmbrellaHomotopy();
  s.tolerances = {{"gridStep", 0.125}, {"starts", 12}, {"times", {0.1, 0.4}}};
  const ProblemSpec back = ProblemSpec::fromJson(s.toJson());
  CHECK(back.toJson() == s.toJson());
  CHECK(back.map == s.map);
  REQUIRE(back.homotopy.has_value());
  CHECK(*back.homotopy == *s.homotopy);
  CHECK(back.tol("gridStep", 1.0) == 0.125);
  CHECK(back.tol("missing", 2.5) == 2.5);
  CHECK(back.count("starts", 3) == 12);
  CHECK(back.list("times", {}) == std::vector<double>{0.1, 0.4});

  const fs::path dir = scratchDir("spec");
  std::ofstream(dir / "p.json") << s.toJson().dump(2);
  CHECK(loadProblem(dir / "p.json").toJson() == s.toJson());

  for (const char* name : {"analyze", "perturb", "homotopy", "analytic2", "example"})
    CHECK(std::string(toString(pipelineFromString(name))) == name);
  CHECK(testing::errorKind([] { pipelineFromString("nope"); }) == ErrorKind::ParseError);

  nlohmann::json noHomotopy = s.toJson();
  noHomotopy["homotopy"] = nullptr;
  CHECK_FALSE(ProblemSpec::fromJson(noHomotopy).homotopy.has_value());

  nlohmann::json bad = s.toJson();
  bad["point"] = {0.0, 0.0};
  CHECK(testing::errorKind([&] { ProblemSpec::fromJson(bad); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1aHex("") == "cbf29ce484222325");
  CHECK(fnv1aHex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1aHex("foobar") == "85944171f73967e8");
}

TEST_CASE("analyze verdicts and exit codes") {
  SUBCASE("planar identity is essential") {
    const RunReport r = runAnalyze(specFor(PipelineKind::Analyze, PolyMap::identity(2), Vec{0, 0}, 1.0));
    CHECK(r.stageErrors.empty());
    CHECK(r.verdict["status"] == "Essential");
    CHECK(r.verdict["invariant"] == 1.0);
    CHECK(r.checks.allPass());
    CHECK(r.exitCode() == 2);
  }
  SUBCASE("degree-zero planar map") {
    const PolyMap f = makeMap(2, {{{"1", {2, 0}}, {"1", {0, 2}}}, {{"1", {1, 1}}}});
    const RunReport r = runAnalyze(specFor(PipelineKind::Analyze, f, Vec{0, 0}, 1.0));
    CHECK(r.verdict["status"] == "InessentialDegreeZero");
    CHECK(r.exitCode() == 0);
  }
  SUBCASE("zeros in the annulus fail the certificate") {
    const PolyMap f = makeMap(2, {{{"1", {2, 0}}, {"1", {0, 2}}, {"-0.25", {0, 0}}}, {{"1", {1, 0}}}});
    const RunReport r = runAnalyze(specFor(PipelineKind::Analyze, f, Vec{0, 0}, 1.0));
    CHECK_FALSE(r.checks.allPass());
    CHECK(r.exitCode() == 1);
  }
  SUBCASE("hopf map") {
    const RunReport r = runExampleHopf();
    CHECK(r.stageErrors.empty());
    CHECK(r.verdict["status"] == "Unknown");
    CHECK(r.checks.allPass());
    CHECK(r.details.contains("note"));
    CHECK(r.exitCode() == 2);
  }
}

TEST_CASE("pipelines through the dispatcher") {
  SUBCASE("perturb") {
    const RunReport r =
        runProblem(specFor(PipelineKind::Perturb, coneUmbrellaMap(), Vec{0, 0, 0}, 1.0));
    CHECK(r.stageErrors.empty());
    CHECK(r.checks.allPass());
    CHECK(r.exitCode() == 0);
    CHECK(r.details["perturbation"]["delta"].get<double>() <= 0.5);
  }
  SUBCASE("homotopy verify") {
    ProblemSpec s = specFor(PipelineKind::Homotopy, coneUmbrellaMap(), Vec{0, 0, 0}, 1.0);
    s.homotopy = coneUmbrellaHomotopy();
    const RunReport r = runProblem(s);
    CHECK(r.stageErrors.empty());
    CHECK(r.checks.allPass());
  }
  SUBCASE("one-variable complexification") {
    const fs::path dir = scratchDir("analytic1");
    const RunReport r = runProblem(
        specFor(PipelineKind::Analytic2, makeMap(1, {{{"1", {2}}}, {{"1", {3}}}}), Vec{0}, 1.0), dir);
    CHECK(r.stageErrors.empty());
    CHECK(r.checks.allPass());
    CHECK(r.details.contains("complexified"));
  }
  SUBCASE("example dispatch needs a name") {
    ProblemSpec s = specFor(PipelineKind::Example, coneUmbrellaMap(), Vec{0, 0, 0}, 1.0);
    CHECK(testing::errorKind([&] { runProblem(s); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("run artifacts") {
  const fs::path dir = scratchDir("artifacts");
  const RunReport r = runExampleHopf();
  writeRunArtifacts(r, dir);
  for (const char* f : {"report.json", "manifest.json", "timings.json"}) CHECK(fs::exists(dir / f));
  nlohmann::json manifest;
  std::ifstream(dir / "manifest.json") >> manifest;
  CHECK(manifest["configHash"] == r.configHash());
  CHECK(r.configHash() == fnv1aHex(r.config.dump()));
  // Timings live in their own file, so the report carries no clock values.
  CHECK_FALSE(r.toJson().contains("timings"));
}

TEST_CASE("slice export") {
  const fs::path dir = scratchDir("export");
  SliceGrid grid{Vec{-1, -1, -1}, Vec{1, 1, 1}, 41};
  const double step = grid.step(0);

  SUBCASE("sphere and an empty level set") {
    const HomotopyFn F = [](std::span<const double> x, double t) {
      return Vec{x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 0.25 - t * 0.0, 1.0};
    };
    const auto paths = exportSlices(F, {0.0}, grid, dir, "s");
    REQUIRE(paths.size() == 3);
    const auto verts = readObjVertices(dir / "s_t0_F1.obj");
    REQUIRE(verts.size() > 100);
    for (const auto& v : verts) CHECK(std::abs(std::hypot(v[0], v[1], v[2]) - 0.5) < 2 * step);
    std::mt19937_64 rng(113);
    for (int k = 0; k < 300; ++k) {
      const Vec y = testing::randomOnSphere(rng, Vec{0, 0, 0}, 0.5);
      double best = INFINITY;
      for (const auto& v : verts) best = std::min(best, std::hypot(v[0] - y[0], v[1] - y[1], v[2] - y[2]));
      CHECK(best < 2 * step);
    }
    CHECK(countPrefix(dir / "s_t0_F2.obj", "v ") == 0);
    CHECK(countPrefix(dir / "s_t0_F2.obj", "f ") == 0);
    CHECK(countPrefix(dir / "s_t0_F2.obj", "#") >= 1);
    CHECK(countPrefix(dir / "s_t0.csv", "") == grid.numNodes() + 2);
  }
  SUBCASE("the double cone has two nappes") {
    grid.res = 40;  // even, so no node sits on the apex
    const PolyMap f = coneUmbrellaMap();
    std::vector<double> values(grid.numNodes());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = f.component(0).evaluate(grid.node(i));
    const TriangleMesh mesh = extractLevelSet(values, grid);
    CHECK(connectedComponents(mesh) == 2);
  }
  SUBCASE("planar slices refuse OBJ") {
    const HomotopyFn F = [](std::span<const double> x, double) { return Vec{x[0], x[1]}; };
    CHECK(testing::errorKind([&] {
            exportSlices(F, {0.0}, SliceGrid{Vec{-1, -1}, Vec{1, 1}, 9}, dir, "p");
          }) == ErrorKind::UnsupportedDimension);
    ExportOptions csvOnly;
    csvOnly.obj = false;
    CHECK(exportSlices(F, {0.0, 0.5}, SliceGrid{Vec{-1, -1}, Vec{1, 1}, 9}, dir, "p", csvOnly).size() == 2);
  }
}

TEST_CASE("reports are deterministic") {
  const RunReport a = runExampleConeUmbrella();
  const RunReport b = runExampleConeUmbrella();
  CHECK(a.toJson().dump(2) == b.toJson().dump(2));
  CHECK(a.exitCode() == 0);
}

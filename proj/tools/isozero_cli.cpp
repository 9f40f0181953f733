// Command-line front end. Every run prints its report JSON to stdout and,
// with --out, writes report.json, manifest.json and timings.json there.

#include "isozero/error.hpp"
#include "isozero/export.hpp"
#include "isozero/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace isozero;

namespace {

struct Overrides {
  std::optional<double> gridStep;
  std::optional<std::size_t> starts;
  std::optional<double> tol;
  std::vector<double> times;
  std::optional<double> epsilon;
  std::optional<double> rho;
  std::optional<std::size_t> grid;
  // homotopy build: delta caps the radius search (it starts at rho and
  // halves), eps1 = min(1, epsilon).
  std::optional<double> delta;
  std::optional<double> eps1;
  bool seedless = true;

  void apply(nlohmann::json& t) const {
    if (gridStep) t["gridStep"] = *gridStep;
    if (starts) t["starts"] = *starts;
    if (tol) t["tolSolve"] = *tol;
    if (!times.empty()) t["times"] = times;
    if (epsilon) t["epsilon"] = *epsilon;
    if (rho) t["rho"] = *rho;
    if (grid) t["grid"] = *grid;
    if (delta) t["rho"] = *delta;
    if (eps1) t["epsilon"] = *eps1;
  }
};

void addCommon(CLI::App* cmd, Overrides& o, std::string& outDir) {
  cmd->add_option("--out", outDir, "Directory for report, manifest and artifacts");
  cmd->add_option("--grid-step", o.gridStep, "Initial certificate cell size");
  cmd->add_option("--starts", o.starts, "Newton multistart count");
  cmd->add_option("--times", o.times, "Slice times")->delimiter(',');
  cmd->add_flag("--seedless", o.seedless, "Deterministic Halton sampling (always on)");
}

int finish(const RunReport& report, const std::string& outDir) {
  if (!outDir.empty()) writeRunArtifacts(report, outDir);
  std::cout << report.toJson().dump(2) << '\n';
  for (const auto& e : report.stageErrors) std::cerr << "stage error: " << e << '\n';
  return report.exitCode();
}

ProblemSpec load(const std::string& path, const Overrides& o, PipelineKind kind) {
  ProblemSpec spec = loadProblem(path);
  spec.pipeline = kind;
  o.apply(spec.tolerances);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isolated zeros of polynomial maps: certification, removal and extension"};
  app.require_subcommand(1);
  Overrides o;
  std::string problem, outDir;

  auto* analyze = app.add_subcommand("analyze", "Certificate and inessentiality verdict");
  analyze->add_option("--problem", problem, "ProblemSpec JSON")->required()->check(CLI::ExistingFile);
  addCommon(analyze, o, outDir);

  auto* perturb = app.add_subcommand("perturb", "Nonvanishing perturbation near the zero");
  perturb->add_option("--problem", problem, "ProblemSpec JSON")->required()->check(CLI::ExistingFile);
  perturb->add_option("--epsilon", o.epsilon, "Closeness epsilon");
  perturb->add_option("--rho", o.rho, "Perturbation radius");
  addCommon(perturb, o, outDir);

  auto* homotopy = app.add_subcommand("homotopy", "Build or verify a removing homotopy");
  homotopy->require_subcommand(1);
  auto* hBuild = homotopy->add_subcommand("build", "Construct and check the radial homotopy");
  auto* hVerify = homotopy->add_subcommand("verify", "Certify slices of the spec's polynomial homotopy");
  for (auto* c : {hBuild, hVerify}) {
    c->add_option("--problem", problem, "ProblemSpec JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--epsilon", o.epsilon, "Closeness epsilon");
    c->add_option("--rho", o.rho, "Perturbation radius");
    addCommon(c, o, outDir);
  }
  hBuild->add_option("--delta", o.delta, "Largest admissible delta (same as --rho)")->excludes("--rho");
  hBuild->add_option("--eps1", o.eps1, "Homotopy closeness eps1 (same as --epsilon)")->excludes("--epsilon");

  auto* analytic = app.add_subcommand("analytic2", "Extension for planar targets");
  analytic->require_subcommand(1);
  auto* aRun = analytic->add_subcommand("run", "Run the construction");
  aRun->add_option("--problem", problem, "ProblemSpec JSON")->required()->check(CLI::ExistingFile);
  aRun->add_option("--grid", o.grid, "Half-ball grid nodes per axis (odd)");
  aRun->add_option("--tol", o.tol, "Dirichlet solver tolerance");
  addCommon(aRun, o, outDir);

  auto* example = app.add_subcommand("example", "Built-in examples");
  example->require_subcommand(1);
  auto* cone = example->add_subcommand("cone-umbrella", "Cone and umbrella in R^3");
  auto* hopf = example->add_subcommand("hopf", "Hopf map R^4 -> R^3");
  addCommon(cone, o, outDir);
  addCommon(hopf, o, outDir);

  auto* exportCmd = app.add_subcommand("export", "CSV norms and OBJ zero sets of time slices");
  std::string which = "cone-umbrella";
  double box = 1.0;
  std::size_t res = 33;
  exportCmd->add_option("--problem", problem, "ProblemSpec JSON with a polynomial homotopy");
  exportCmd->add_option("--example", which, "Built-in homotopy when no problem is given")
      ->check(CLI::IsMember({"cone-umbrella"}));
  exportCmd->add_option("--box", box, "Half side of the sampled cube");
  exportCmd->add_option("--res", res, "Nodes per axis");
  exportCmd->add_option("--times", o.times, "Slice times")->delimiter(',');
  exportCmd->add_option("--out", outDir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (analyze->parsed()) return finish(runAnalyze(load(problem, o, PipelineKind::Analyze)), outDir);
    if (perturb->parsed()) return finish(runPerturb(load(problem, o, PipelineKind::Perturb)), outDir);
    if (hBuild->parsed())
      return finish(runHomotopy(load(problem, o, PipelineKind::Homotopy), true, outDir), outDir);
    if (hVerify->parsed())
      return finish(runHomotopy(load(problem, o, PipelineKind::Homotopy), false, outDir), outDir);
    if (aRun->parsed()) return finish(runAnalytic2(load(problem, o, PipelineKind::Analytic2), outDir), outDir);
    if (cone->parsed() || hopf->parsed()) {
      nlohmann::json t = nlohmann::json::object();
      o.apply(t);
      return finish(cone->parsed() ? runExampleConeUmbrella(t) : runExampleHopf(t), outDir);
    }
    if (exportCmd->parsed()) {
      PolyMap F;
      Vec center;
      if (!problem.empty()) {
        const ProblemSpec spec = loadProblem(problem);
        if (!spec.homotopy) throw Error(ErrorKind::InvalidArgument, "export needs a polynomial homotopy");
        F = *spec.homotopy;
        center = spec.point;
      } else {
        F = coneUmbrellaHomotopy();
        center = Vec(3, 0.0);
      }
      const std::size_t n = F.n() - 1;
      SliceGrid grid;
      grid.res = res;
      for (std::size_t k = 0; k < n; ++k) {
        grid.lower.push_back(center[k] - box);
        grid.upper.push_back(center[k] + box);
      }
      const auto fn = [F](std::span<const double> x, double t) {
        Vec xt(x.begin(), x.end());
        xt.push_back(t);
        return F.evaluate(xt);
      };
      ExportOptions opts;
      opts.obj = n == 3;
      const auto times = o.times.empty() ? std::vector<double>{0.0, 0.2} : o.times;
      for (const auto& path : exportSlices(fn, times, grid, outDir, "slice", opts)) std::cout << path.string() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "isozero/alexander.hpp"
#include "isozero/analytic.hpp"
#include "isozero/harness.hpp"
#include "isozero/obstruction.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace isozero;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Vec randomInBall(std::mt19937_64& rng, const Vec& c, double r) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec d(c.size());
  for (auto& v : d) v = g(rng);
  const double s = r * std::pow(u(rng), 1.0 / static_cast<double>(c.size())) / norm(d);
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = c[i] + s * d[i];
  return d;
}

Vec randomOnSphere(std::mt19937_64& rng, const Vec& c, double r) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec d(c.size());
  for (auto& v : d) v = g(rng);
  const double s = r / norm(d);
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = c[i] + s * d[i];
  return d;
}

const Check* findCheck(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks.checks)
    if (c.name == name) return &c;
  return nullptr;
}

// Criteria 1 and 9 share the golden runs.
struct GoldenRuns {
  RunReport first, second;
  double seconds = 0.0;
};

const GoldenRuns& goldenRuns() {
  static const GoldenRuns runs = [] {
    GoldenRuns g;
    const auto t0 = std::chrono::steady_clock::now();
    g.first = runExampleConeUmbrella();
    g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    g.second = runExampleConeUmbrella();
    return g;
  }();
  return runs;
}

Outcome criterion1() {
  Outcome o;
  const auto& g = goldenRuns();
  const RunReport& r = g.first;
  o.require(r.stageErrors.empty(), "stage errors");
  const Check* cert = findCheck(r, "isolation certificate");
  o.require(cert && cert->pass, "annulus certificate not VALID");
  if (!r.certificates.empty()) {
    const auto& c = r.certificates.front();
    o.require(c["innerRadius"] == 0.05 && c["outerRadius"] == 1.0, "certificate annulus is not [0.05, 1]");
  }
  o.require(r.verdict.value("status", "") == "InessentialAlways", "verdict not InessentialAlways");
  for (const char* t : {"0.05", "0.1", "0.2", "0.5"}) {
    const Check* s = findCheck(r, std::string("explicit homotopy: slice t = ") + t);
    o.require(s && s->pass, std::string("slice t = ") + t);
  }
  o.require(g.seconds < 120.0, "runtime " + num(g.seconds) + " s");
  if (o.pass) o.detail = "runtime " + num(g.seconds) + " s, all explicit slices certified";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const PolyMap f = coneUmbrellaMap();
  const BallSpec unit(Vec(3, 0.0), 1.0);
  std::mt19937_64 rng(20);
  std::size_t found = 0;
  double worst = 0.0;
  // Translations: f2 is moved, f1 stays; residuals re-evaluated directly.
  for (int k = 0; k < 20; ++k) {
    const Vec tau = randomInBall(rng, Vec(3, 0.0), 0.1);
    const PolyMap moved(3, {f.component(0), shiftMap(PolyMap(3, {f.component(1)}), tau).component(0)});
    const auto w = findZeroMultistart(moved, unit, 200, 1e-10);
    if (!w) continue;
    Vec y = w->point;
    for (int i = 0; i < 3; ++i) y[i] -= tau[i];
    const double res = std::hypot(f.component(0).evaluate(w->point), f.component(1).evaluate(y));
    worst = std::max(worst, res);
    if (res < 1e-8) ++found;
  }
  o.require(found == 20, "translations " + std::to_string(found) + "/20");
  std::size_t levels = 0;
  const std::vector<double> cs{-0.1, -0.05, 0.05, 0.1};
  for (double c1 : cs)
    for (double c2 : cs) {
      const Vec c{c1, c2};
      const auto w = findZeroMultistart(offsetMap(f, c), unit, 200, 1e-10);
      if (!w) continue;
      const double res =
          std::hypot(f.component(0).evaluate(w->point) + c1, f.component(1).evaluate(w->point) + c2);
      worst = std::max(worst, res);
      if (res < 1e-8) ++levels;
    }
  o.require(levels == 16, "offsets " + std::to_string(levels) + "/16");
  if (o.pass) o.detail = "20/20 translations, 16/16 offsets, max residual " + num(worst);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const PolyMap f = coneUmbrellaMap();
  const Vec p{0, 0, 0};
  const auto g = buildPerturbationAuto(f, p, 1.0, 0.5, 0.1, 3);
  const auto F = buildAlexanderHomotopy(f, g, p, g.delta(), g.m());
  const double delta = F.delta();
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> ut(1e-3, 1.0);

  double seam = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double tau = delta / 2 * ut(rng);
    const auto [a, b] = F.seamBranches(randomOnSphere(rng, p, tau * tau / 2), tau);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    seam = std::max(seam, d);
  }
  o.require(seam <= 1e-9, "seam " + num(seam));

  double lower = INFINITY;
  for (int k = 0; k < 5000; ++k) {
    const double tau = delta / 2 * ut(rng);
    const Vec x = randomInBall(rng, p, tau * tau / 2 * (1 - 1e-12));
    lower = std::min(lower, norm(F.evaluateF0(x, tau)) - (2 * tau / delta) * (F.m() / 2));
  }
  o.require(lower >= -1e-9, "inner lower bound margin " + num(lower));

  std::size_t fixed = 0, zeroTime = 0, total = 0;
  std::uniform_real_distribution<double> t01(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec x = randomInBall(rng, p, 1.0);
    ++total;
    if (F.evaluate(x, 0.0) == f.evaluate(x)) ++zeroTime;
    if (norm(x) > delta / 2) {
      if (F.evaluate(x, t01(rng)) == f.evaluate(x)) ++fixed;
    } else {
      ++fixed;
    }
  }
  o.require(fixed == total, "fixity outside delta/2 broken");
  o.require(zeroTime == total, "F(., 0) differs from f");
  if (o.pass)
    o.detail = "seam " + num(seam) + ", lower-bound margin " + num(lower) + ", delta " + num(delta) + ", m " +
               num(F.m());
  return o;
}

Outcome criterion4() {
  Outcome o;
  const BallSpec unit(Vec{0, 0}, 1.0);
  for (int d = -3; d <= 3; ++d) {
    const Field zd = [d](std::span<const double> x) {
      const std::complex<double> w = std::pow(std::complex<double>(x[0], x[1]), d);
      return Vec{w.real(), w.imag()};
    };
    // Fixed-step oracle.
    const int steps = 100000;
    double total = 0.0, prev = 0.0;
    for (int k = 0; k <= steps; ++k) {
      const double a = 2 * kPi * k / steps;
      const Vec v = zd(Vec{std::cos(a), std::sin(a)});
      const double cur = std::atan2(v[1], v[0]);
      if (k > 0) total += std::remainder(cur - prev, 2 * kPi);
      prev = cur;
    }
    const int oracle = static_cast<int>(std::lround(total / (2 * kPi)));
    const int adaptive = windingNumber(zd, unit);
    o.require(oracle == d && adaptive == d,
              "z^" + std::to_string(d) + ": adaptive " + std::to_string(adaptive) + ", oracle " +
                  std::to_string(oracle));
  }
  const BallSpec sphere(Vec{0, 0, 0}, 1.0);
  const DegreeResult id = brouwerDegree(PolyMap::identity(3), sphere, 1, 4);
  const PolyMap refl(3, {SparsePolynomial(3) - SparsePolynomial::variable(3, 0), SparsePolynomial::variable(3, 1),
                         SparsePolynomial::variable(3, 2)});
  const DegreeResult rf = brouwerDegree(refl, sphere, 1, 4);
  o.require(id.degree == 1, "identity degree " + std::to_string(id.degree));
  o.require(rf.degree == -1, "reflection degree " + std::to_string(rf.degree));
  o.require(id.residual < 0.1 && rf.residual < 0.1, "snap residual too large");
  o.require(id.meshLevel <= 4 && rf.meshLevel <= 4, "mesh level above 4");
  if (o.pass)
    o.detail = "windings -3..3 agree; degrees 1 / -1, residuals " + num(id.residual) + " / " + num(rf.residual);
  return o;
}

double poissonError(const BallSpec& ball, std::size_t n, const std::function<double(const Vec&)>& u,
                    std::size_t& nodes, unsigned seed) {
  const auto quad = defaultPoissonQuadrature(ball, n);
  nodes = std::max(nodes, quad.nodes.size());
  const HarmonicField H = poissonSolveBall(quad, [&](std::span<const double> x) {
    return Complex(u(Vec(x.begin(), x.end())), 0.0);
  });
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec x = k % 5 == 0 ? randomOnSphere(rng, ball.center, 0.8 * ball.radius)
                             : randomInBall(rng, ball.center, 0.8 * ball.radius);
    worst = std::max(worst, std::abs(H.evaluate(x).real() - u(x)));
  }
  return worst;
}

Outcome criterion5() {
  Outcome o;
  const BallSpec disk(Vec{0, 0}, 1.0), ball(Vec{0, 0, 0}, 1.0);
  std::size_t nodes = 0;
  const std::vector<std::function<double(const Vec&)>> planar{
      [](const Vec& x) { return x[0] - 2 * x[1]; },
      [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; },
      [](const Vec& x) { return x[0] * x[0] * x[0] - 3 * x[0] * x[1] * x[1]; },
      [](const Vec& x) { return 3 * x[0] * x[0] * x[1] - x[1] * x[1] * x[1]; }};
  const std::vector<std::function<double(const Vec&)>> spatial{
      [](const Vec& x) { return x[0] * x[1]; },
      [](const Vec& x) { return 2 * x[2] * x[2] - x[0] * x[0] - x[1] * x[1]; },
      [](const Vec& x) { return x[0] * x[1] * x[2]; },
      [](const Vec& x) { return x[2] * x[2] * x[2] - 1.5 * x[2] * (x[0] * x[0] + x[1] * x[1]); }};
  double worstPoly = 0.0;
  unsigned seed = 50;
  for (const auto& u : planar) worstPoly = std::max(worstPoly, poissonError(disk, 2, u, nodes, seed++));
  for (const auto& u : spatial) worstPoly = std::max(worstPoly, poissonError(ball, 3, u, nodes, seed++));
  const auto one = [](const Vec&) { return 1.0; };
  const double worstConst =
      std::max(poissonError(disk, 2, one, nodes, seed++), poissonError(ball, 3, one, nodes, seed++));
  o.require(worstPoly < 1e-5, "harmonic error " + num(worstPoly));
  o.require(worstConst < 1e-8, "constant error " + num(worstConst));
  o.require(nodes <= 4096, "nodes " + std::to_string(nodes));
  if (o.pass)
    o.detail = "max error " + num(worstPoly) + " (harmonic), " + num(worstConst) + " (constant), " +
               std::to_string(nodes) + " nodes";
  return o;
}

Outcome criterion6() {
  Outcome o;
  const PolyMap f(2, {SparsePolynomial::variable(2, 0) * SparsePolynomial::variable(2, 0) +
                          SparsePolynomial::variable(2, 1) * SparsePolynomial::variable(2, 1),
                      SparsePolynomial::variable(2, 0) * SparsePolynomial::variable(2, 1)});
  const Vec p{0, 0};
  double Cs[2] = {0, 0};
  const std::size_t grids[2] = {65, 129};
  for (int gi = 0; gi < 2; ++gi) {
    AnalyticOptions opts;
    opts.gridRes = grids[gi];
    const AnalyticResult r = runAnalyticPipeline(f, p, opts);
    const std::string tag = "grid " + std::to_string(grids[gi]) + ": ";
    Cs[gi] = r.extension.C;
    o.require(r.winding == 0 && r.verdict.inessential(), tag + "not inessential");
    std::mt19937_64 rng(60 + gi);
    double minRe = INFINITY;
    for (int k = 0; k < 10000; ++k) minRe = std::min(minRe, r.root->evaluate(randomInBall(rng, p, r.rho2 * 0.999)).real());
    o.require(minRe >= -1e-9, tag + "Re root " + num(minRe));
    o.require(r.holder.pass && r.holder.pairs >= 10000, tag + "Hoelder bound");
    o.require(std::abs(r.holder.C2 - 2 * r.k * std::pow(r.holder.C1, 1.0 / r.k)) <= 1e-12 * r.holder.C2,
              tag + "C2 formula");
    // F(x, 0) against f on shells [0.1, 1] rho6.
    double rel = 0.0;
    for (int s = 0; s <= 9; ++s) {
      const double radius = r.rho6 * (0.1 + 0.1 * s);
      for (int a = 0; a < 64; ++a) {
        const double th = 2 * kPi * a / 64;
        const Vec x{radius * std::cos(th), radius * std::sin(th)};
        const Vec F0 = r.F.evaluate(x, 0.0), fx = f.evaluate(x);
        rel = std::max(rel, std::hypot(F0[0] - fx[0], F0[1] - fx[1]) / norm(fx));
      }
    }
    o.require(rel < 0.02 && r.extension.maxRelativeT0Error < 0.02, tag + "t = 0 error " + num(rel));
    bool positive = !r.extension.shellMinima.empty();
    for (double m : r.extension.shellMinima) positive = positive && m > 0.0;
    o.require(positive, tag + "shell minimum not positive");
    o.require(std::isfinite(r.extension.C) && r.extension.C > 0.0, tag + "C not finite");
  }
  const double drift = std::abs(Cs[0] - Cs[1]) / Cs[1];
  o.require(drift <= 0.10, "C drift " + num(drift));
  if (o.pass) o.detail = "C = " + num(Cs[0]) + " / " + num(Cs[1]) + " (grids 65 / 129), drift " + num(drift);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const SparsePolynomial x = SparsePolynomial::variable(1, 0);
  const auto c = complexify1d(PolyMap(1, {x * x, x * x * x}), 0.9);
  const bool coeffs = c.coefficients.size() == 4 && c.coefficients[0] == Complex(0, 0) &&
                      c.coefficients[1] == Complex(0, 0) && c.coefficients[2] == Complex(1, 0) &&
                      c.coefficients[3] == Complex(0, 1);
  o.require(coeffs, "coefficients are not z^2 + i z^3");
  // Hand count: z^2 (1 + i z) has the double root 0 and the root i.
  o.require(c.distinctRootsInside == 1, "distinct roots inside " + std::to_string(c.distinctRootsInside));
  o.require(c.rootsInside.size() == 2, "roots inside with multiplicity " + std::to_string(c.rootsInside.size()));
  if (o.pass) o.detail = "one distinct root (0, multiplicity 2) in |z| < 0.9; z = i outside";
  return o;
}

Outcome criterion8() {
  Outcome o;
  const RunReport r = runExampleHopf();
  o.require(r.stageErrors.empty(), "stage errors");
  const Check* cert = findCheck(r, "isolation certificate");
  o.require(cert && cert->pass, "certificate not VALID");
  const PolyMap f = hopfMap();
  std::mt19937_64 rng(80);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec x = randomInBall(rng, Vec(4, 0.0), 1.0);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    worst = std::max(worst, std::abs(norm(f.evaluate(x)) - r2));
  }
  o.require(worst <= 1e-12, "identity error " + num(worst));
  o.require(r.verdict.value("status", "") == "Unknown", "verdict not Unknown");
  o.require(r.details.contains("note") && r.details["note"].get<std::string>().find("Hopf") != std::string::npos,
            "obstruction note missing");
  if (o.pass) o.detail = "identity error " + num(worst) + ", verdict Unknown";
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto& g = goldenRuns();
  const std::string a = g.first.toJson().dump(2), b = g.second.toJson().dump(2);
  o.require(a == b, "reports differ");
  if (o.pass) o.detail = std::to_string(a.size()) + " bytes, identical, hash " + fnv1aHex(a);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"1 cone/umbrella golden run", criterion1}, {"2 impossibility sweeps", criterion2},
      {"3 homotopy inequality suite", criterion3}, {"4 winding and degree oracles", criterion4},
      {"5 Poisson solver", criterion5},            {"6 planar analytic pipeline", criterion6},
      {"7 one-variable complexification", criterion7}, {"8 Hopf run", criterion8},
      {"9 determinism", criterion9}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

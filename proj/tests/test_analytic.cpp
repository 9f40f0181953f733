#include "isozero/analytic.hpp"
#include "isozero/harness.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace isozero;
using testing::makeMap;

namespace {

constexpr double kPi = std::numbers::pi;

double maxPoissonError(const BallSpec& ball, std::size_t n, const std::function<double(const Vec&)>& u,
                       double maxFrac, unsigned seed) {
  const auto quad = defaultPoissonQuadrature(ball, n);
  const HarmonicField H = poissonSolveBall(quad, [&](std::span<const double> x) {
    return Complex(u(Vec(x.begin(), x.end())), 0.0);
  });
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < 400; ++k) {
    const Vec x = testing::randomInBall(rng, ball.center, maxFrac * ball.radius);
    worst = std::max(worst, std::abs(H.evaluate(x).real() - u(x)));
  }
  // The outermost admissible radius as well.
  Vec edge = ball.center;
  edge[0] += maxFrac * ball.radius;
  return std::max(worst, std::abs(H.evaluate(edge).real() - u(edge)));
}

AnalyticOptions fastOptions() {
  AnalyticOptions o;
  o.gridRes = 65;
  return o;
}

}  // namespace

TEST_CASE("poisson integral on the disk and the ball") {
  const BallSpec disk(Vec{0.3, -0.2}, 1.5);
  const BallSpec ball(Vec{0.1, 0.2, -0.1}, 1.0);
  CHECK(defaultPoissonQuadrature(ball, 3).nodes.size() <= 4096);
  CHECK(defaultPoissonQuadrature(disk, 2).nodes.size() <= 4096);

  SUBCASE("constants") {
    CHECK(maxPoissonError(disk, 2, [](const Vec&) { return 2.5; }, 0.9, 1) < 1e-8);
    CHECK(maxPoissonError(ball, 3, [](const Vec&) { return -1.25; }, 0.9, 2) < 1e-8);
  }
  SUBCASE("harmonic polynomials in the plane") {
    const auto re3 = [&](const Vec& x) {
      const double a = x[0] - 0.3, b = x[1] + 0.2;
      return a * a * a - 3 * a * b * b;
    };
    CHECK(maxPoissonError(disk, 2, re3, 0.8, 3) < 1e-6);
    const auto lin = [](const Vec& x) { return 2 * x[0] - x[1] + 1; };
    CHECK(maxPoissonError(disk, 2, lin, 0.8, 4) < 1e-6);
  }
  SUBCASE("harmonic polynomials in space") {
    const auto xy = [](const Vec& x) { return (x[0] - 0.1) * (x[1] - 0.2); };
    CHECK(maxPoissonError(ball, 3, xy, 0.8, 5) < 1e-5);
    const auto cubic = [](const Vec& x) {
      const double a = x[0] - 0.1, b = x[1] - 0.2, c = x[2] + 0.1;
      return c * c * c - 1.5 * c * (a * a + b * b);
    };
    CHECK(maxPoissonError(ball, 3, cubic, 0.8, 6) < 1e-5);
  }
  SUBCASE("evaluation near the boundary is refused") {
    const auto quad = defaultPoissonQuadrature(disk, 2);
    const HarmonicField H = poissonSolveBall(quad, [](std::span<const double>) { return Complex(1, 0); });
    CHECK(testing::errorKind([&] { H.evaluate(Vec{0.3 + 0.96 * 1.5, -0.2}); }) ==
          ErrorKind::EvalTooCloseToBoundary);
  }
}

TEST_CASE("complexification in one variable") {
  SUBCASE("x^2 + i x^3") {
    const auto c = complexify1d(makeMap(1, {{{"1", {2}}}, {{"1", {3}}}}), 0.9);
    REQUIRE(c.coefficients.size() == 4);
    CHECK(c.coefficients[2] == Complex(1, 0));
    CHECK(c.coefficients[3] == Complex(0, 1));
    CHECK(c.roots.size() == 3);
    CHECK(c.rootsInside.size() == 2);
    CHECK(c.distinctRootsInside == 1);
    // The remaining root solves 1 + i z = 0.
    bool foundI = false;
    for (const auto& r : c.roots) foundI = foundI || std::abs(r - Complex(0, 1)) < 1e-12;
    CHECK(foundI);
    const auto F = c.asHomotopy();
    CHECK(F(Vec{0.4}, 0.0)[0] == doctest::Approx(0.16));
    CHECK(F(Vec{0.4}, 0.0)[1] == doctest::Approx(0.064));
    const Complex z(0.3, -0.2);
    const Vec v = F(Vec{0.3}, -0.2);
    CHECK(std::abs(Complex(v[0], v[1]) - (z * z + Complex(0, 1) * z * z * z)) < 1e-15);
  }
  SUBCASE("linear cases") {
    const auto a = complexify1d(makeMap(1, {{{"1", {1}}}, {}}), 0.9);
    CHECK(a.distinctRootsInside == 1);
    const auto b = complexify1d(makeMap(1, {{}, {{"1", {1}}}}), 0.9);
    CHECK(b.distinctRootsInside == 1);
    CHECK(b.evaluate(Complex(2, 0)) == Complex(0, 2));
  }
  SUBCASE("errors") {
    CHECK(testing::errorKind([] { complexify1d(makeMap(1, {{{"1", {1}}, {"1", {0}}}, {}}), 0.9); }) ==
          ErrorKind::InvalidArgument);
    CHECK(testing::errorKind([] { complexify1d(PolyMap::zero(1, 2), 0.9); }) == ErrorKind::NonIsolatedComplexZero);
    CHECK(testing::errorKind([] { complexify1d(makeMap(1, {{{"1", {3}}, {"-0.25", {1}}}, {}}), 0.9); }) ==
          ErrorKind::NonIsolatedComplexZero);
  }
}

TEST_CASE("root order") {
  CHECK(chooseRootOrder(0.0) == 1);
  CHECK(chooseRootOrder(1.5) == 1);
  CHECK(chooseRootOrder(kPi / 2 + 1e-9) == 2);
  CHECK(chooseRootOrder(10.0) == 7);
  for (int k = 1; k <= 20; ++k) {
    const double sup = 0.37 * k;
    CHECK(sup / chooseRootOrder(sup) < kPi / 2);
  }
}

TEST_CASE("k-th root of a unimodular constant") {
  const Complex c = std::polar(1.0, kPi / 3);
  const ComplexField mf = [c](std::span<const double>) { return c; };
  const BallSpec ball(Vec{0, 0}, 1.0);
  const auto lift = std::make_shared<const AngleLift>(polarLift(mf, ball, 2));
  for (double t : lift->theta) CHECK(t == doctest::Approx(kPi / 3));
  const RootField g = kthRootField(mf, lift, 2);
  CHECK(g.k() == 2);
  std::mt19937_64 rng(103);
  for (int k = 0; k < 100; ++k) {
    const Vec x = testing::randomInBall(rng, ball.center, 0.99);
    CHECK(std::abs(g.evaluate(x) - std::polar(1.0, kPi / 6)) < 1e-12);
  }
}

TEST_CASE("angle budget") {
  const ComplexField mf = [](std::span<const double> x) { return std::polar(1.0, 5.0 * x[0]); };
  const BallSpec ball(Vec{0, 0}, 1.0);
  const auto lift = std::make_shared<const AngleLift>(polarLift(mf, ball, 3));
  const auto [lo, hi] = std::minmax_element(lift->theta.begin(), lift->theta.end());
  CHECK(*hi - *lo == doctest::Approx(10.0).epsilon(1e-2));
  CHECK(lift->maxAbsTheta() >= 5.0);
  CHECK(testing::errorKind([&] { kthRootField(mf, lift, 1); }) == ErrorKind::AngleBudgetExceeded);
  const int k = chooseRootOrder(lift->maxAbsTheta());
  const RootField g = kthRootField(mf, lift, k);
  const Check* half = g.report().find("root-half-plane");
  REQUIRE(half != nullptr);
  CHECK(half->pass);
}

TEST_CASE("holder check") {
  // g^2 = i x exactly, so C1 = 1.
  const ComplexField g = [](std::span<const double> x) {
    return std::sqrt(std::abs(x[0])) * std::polar(1.0, kPi / 4 * (x[0] > 0 ? 1 : (x[0] < 0 ? -1 : 0)));
  };
  std::vector<Vec> samples;
  for (int i = 0; i <= 2000; ++i) samples.push_back(Vec{-1.0 + i / 1000.0});
  const HolderReport r = holderCheck(g, 2, samples, 10000);
  CHECK(r.C1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.C2 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.pass);
  CHECK(r.worstRatio <= 1.0);
  CHECK(r.pairs > 0);
}

TEST_CASE("half-ball Dirichlet problem") {
  HalfBallOptions opts;
  opts.gridRes = 33;
  opts.tolSolve = 1e-10;
  SUBCASE("constant data") {
    const auto H = dirichletHalfBall([](std::span<const double>) { return Complex(1.0, 0.0); },
                                     [](std::span<const double>, double) { return Complex(1.0, 0.0); }, Vec{0, 0},
                                     0.5, opts);
    for (std::size_t i = 0; i < H.values.size(); ++i)
      if (H.status[i] != 0) CHECK(std::abs(H.values[i] - Complex(1, 0)) < 1e-9);
    CHECK(H.minInteriorReal() == doctest::Approx(1.0));
  }
  SUBCASE("manufactured harmonic polynomial") {
    // Harmonic in (x, y, t): Re = 3 + x^2 - t^2 + y t, Im = x y t + x.
    const auto exact = [](double x, double y, double t) {
      return Complex(3 + x * x - t * t + y * t, x * y * t + x);
    };
    const Vec p{0.1, -0.1};
    const double rho = 0.5;
    const auto H = dirichletHalfBall(
        [&](std::span<const double> x) { return exact(x[0] - p[0], x[1] - p[1], 0.0); },
        [&](std::span<const double> x, double t) { return exact(x[0] - p[0], x[1] - p[1], t); }, p, rho, opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < H.gridRes; ++i)
      for (std::size_t j = 0; j < H.gridRes; ++j)
        for (std::size_t l = 0; l < H.tRes; ++l) {
          const std::size_t ix[2] = {i, j};
          const std::size_t id = H.index(ix, l);
          if (H.status[id] == 0) continue;
          const double x = -rho + i * H.h, y = -rho + j * H.h, t = l * H.h;
          worst = std::max(worst, std::abs(H.values[id] - exact(x, y, t)));
        }
    CHECK(worst < 10 * opts.tolSolve * 100);
    CHECK(H.errorEstimate < opts.tolSolve);
    // t = 0 reproduces the flat data exactly.
    const Vec x{0.23, -0.05};
    CHECK(H.interpolate(x, 0.0) == exact(x[0] - p[0], x[1] - p[1], 0.0));
  }
  SUBCASE("too many nodes") {
    HalfBallOptions big = opts;
    big.gridRes = 65;
    big.maxNodes = 1000;
    CHECK_THROWS(dirichletHalfBall([](std::span<const double>) { return Complex(1, 0); },
                                   [](std::span<const double>, double) { return Complex(1, 0); }, Vec{0, 0}, 0.5, big));
  }
}

TEST_CASE("extension of a trivial map") {
  HalfBallOptions opts;
  opts.gridRes = 17;
  const auto H = std::make_shared<const HalfBallSolution>(
      dirichletHalfBall([](std::span<const double>) { return Complex(1, 0); },
                        [](std::span<const double>, double) { return Complex(1, 0); }, Vec{0, 0}, 0.5, opts));
  const ExtensionField F = assembleExtension(H, 1, [](std::span<const double>) { return Complex(1, 0); }, 0.4);
  std::mt19937_64 rng(107);
  for (int k = 0; k < 200; ++k) {
    const Vec x = testing::randomInBall(rng, Vec{0, 0}, 0.3);
    const double t = 0.4 * (k / 200.0);
    const Vec v = F.evaluate(x, t);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(v[1]) < 1e-9);
    CHECK(F.evaluate(x, t) == F.evaluate(x, -t));
  }
  CHECK(testing::errorKind([&] { F.evaluate(Vec{0.6, 0}, 0.0); }) == ErrorKind::RadiusOutOfDomain);
  const ExtensionField Z = assembleExtension(H, 1, [](std::span<const double>) { return Complex(0, 0); }, 0.4);
  CHECK(testing::errorKind([&] { Z.evaluate(Vec{0.1, 0}, 0.0); }) == ErrorKind::MultiplierUnderflow);
}

TEST_CASE("planar golden input") {
  const PolyMap f = makeMap(2, {{{"1", {2, 0}}, {"1", {0, 2}}}, {{"1", {1, 1}}}});
  const Vec p{0, 0};
  const AnalyticResult r = runAnalyticPipeline(f, p, fastOptions());
  CHECK(r.winding == 0);
  CHECK(r.verdict.inessential());
  CHECK(r.rho2 == doctest::Approx(0.4));
  CHECK(r.rho6 == doctest::Approx(0.32));
  CHECK(r.k == chooseRootOrder(r.supTheta));
  CHECK(r.supTheta / r.k < kPi / 2);
  CHECK(r.holder.pass);
  CHECK(r.holder.C2 == doctest::Approx(2 * r.k * std::pow(r.holder.C1, 1.0 / r.k)));
  CHECK(r.extension.maxRelativeT0Error < 0.02);
  for (double m : r.extension.shellMinima) CHECK(m > 0.0);
  CHECK(std::isfinite(r.extension.C));
  CHECK(r.extension.C > 0.0);
  for (const auto& c : r.checks.checks) {
    INFO(c.name, " ", c.value, " ", c.bound, " ", c.note);
    CHECK(c.pass);
  }

  // Independent root check: the real part of the root field on random points.
  std::mt19937_64 rng(109);
  for (int k = 0; k < 2000; ++k) {
    const Vec x = testing::randomInBall(rng, p, r.rho2 * 0.999);
    CHECK(r.root->evaluate(x).real() >= -1e-9);
  }
  // F(x, 0) against f directly.
  for (int k = 0; k < 500; ++k) {
    Vec x = testing::randomInBall(rng, p, r.rho6);
    if (norm(x) < 0.1 * r.rho6) continue;
    const Vec F0 = r.F.evaluate(x, 0.0), fx = f.evaluate(x);
    CHECK(norm(testing::diff(F0, fx)) <= 0.02 * norm(fx));
    const double t = 0.5 * r.rho6 * (k % 7) / 7.0;
    CHECK(r.F.evaluate(x, t) == r.F.evaluate(x, -t));
  }

  const auto j = r.manifest();
  for (const char* key : {"k", "C", "C3Observed", "shellMinima", "rho2", "rho6", "checks"}) CHECK(j.contains(key));
}

TEST_CASE("essential planar input is rejected") {
  CHECK(testing::errorKind([] { runAnalyticPipeline(PolyMap::identity(2), Vec{0, 0}, fastOptions()); }) ==
        ErrorKind::CycleObstruction);
  CHECK(testing::errorKind([] { runAnalyticPipeline(hopfMap(), Vec{0, 0, 0, 0}, fastOptions()); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("spatial input on a coarse grid") {
  AnalyticOptions o;
  o.gridRes = 17;
  o.holderPairs = 2000;
  const AnalyticResult r = runAnalyticPipeline(coneUmbrellaMap(), Vec{0, 0, 0}, o);
  CHECK(std::optional(r.verdict.status) == VerdictStatus::InessentialAlways);
  CHECK(r.k >= 1);
  CHECK(r.holder.pass);
  CHECK(r.extension.maxRelativeT0Error < 0.02);
  for (double m : r.extension.shellMinima) CHECK(m > 0.0);
}

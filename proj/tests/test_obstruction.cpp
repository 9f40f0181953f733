#include "isozero/harness.hpp"
#include "isozero/obstruction.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace isozero;
using testing::makeMap;

namespace {

constexpr double kPi = std::numbers::pi;

Field fieldOf(const PolyMap& f) {
  return [f](std::span<const double> x) { return f.evaluate(x); };
}

// Fixed-step argument accumulation, the reference the adaptive routine must match.
int windingOracle(const Field& f, const BallSpec& c, int steps = 100000) {
  double total = 0.0;
  auto arg = [&](int k) {
    const double a = 2 * kPi * k / steps;
    const Vec x{c.center[0] + c.radius * std::cos(a), c.center[1] + c.radius * std::sin(a)};
    const Vec v = f(x);
    return std::atan2(v[1], v[0]);
  };
  double prev = arg(0);
  for (int k = 1; k <= steps; ++k) {
    const double cur = arg(k);
    total += std::remainder(cur - prev, 2 * kPi);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2 * kPi)));
}

// (Re, Im) of z^d, or of conj(z)^|d| when d < 0, expanded binomially.
PolyMap powerMap(int d) {
  const int a = std::abs(d);
  SparsePolynomial re(2), im(2);
  double binom = 1.0;
  for (int k = 0; k <= a; ++k) {
    // i^k (or (-i)^k) times C(a, k) x^(a-k) y^k.
    const std::complex<double> ik = std::pow(std::complex<double>(0, d < 0 ? -1 : 1), k);
    const Exponent e{static_cast<unsigned>(a - k), static_cast<unsigned>(k)};
    const long cr = std::lround(binom * ik.real()), ci = std::lround(binom * ik.imag());
    if (cr != 0) re.addTerm(e, Rational(cr));
    if (ci != 0) im.addTerm(e, Rational(ci));
    binom = binom * (a - k) / (k + 1);
  }
  if (a == 0) return makeMap(2, {{{"1", {0, 0}}}, {}});
  return PolyMap(2, {re, im});
}

}  // namespace

TEST_CASE("winding numbers") {
  const BallSpec unit(Vec{0, 0}, 1.0);
  SUBCASE("z squared") {
    const PolyMap f = makeMap(2, {{{"1", {2, 0}}, {"-1", {0, 2}}}, {{"2", {1, 1}}}});
    CHECK(windingNumber(f, unit) == 2);
    CHECK(windingOracle(fieldOf(f), unit) == 2);
  }
  SUBCASE("powers of z and its conjugate") {
    for (int d = -3; d <= 3; ++d) {
      const PolyMap f = powerMap(d);
      const int oracle = windingOracle(fieldOf(f), unit);
      CHECK(oracle == d);
      CHECK(windingNumber(f, unit) == oracle);
      CHECK(windingNumber(f, unit, 0.1) == oracle);
    }
  }
  SUBCASE("image in the right half-plane") {
    const PolyMap f = makeMap(2, {{{"1", {0, 0}}, {"0.5", {1, 0}}}, {{"0.5", {0, 1}}}});
    CHECK(windingNumber(f, unit) == 0);
  }
  SUBCASE("conjugation") {
    const PolyMap f = makeMap(2, {{{"1", {1, 0}}}, {{"-1", {0, 1}}}});
    CHECK(windingNumber(f, unit) == -1);
  }
  SUBCASE("positive scalar factor") {
    const PolyMap f = powerMap(3);
    const Field scaled = [f](std::span<const double> x) {
      Vec v = f.evaluate(x);
      for (auto& c : v) c *= 2.0 + x[0];
      return v;
    };
    CHECK(windingNumber(scaled, unit) == windingNumber(f, unit));
  }
  SUBCASE("off-center circle") {
    CHECK(windingNumber(PolyMap::identity(2), BallSpec(Vec{2, 0}, 1.0)) == 0);
    CHECK(windingNumber(PolyMap::identity(2), BallSpec(Vec{0.5, 0.2}, 1.0)) == 1);
  }
  SUBCASE("zero on the circle") {
    const PolyMap f = makeMap(2, {{{"1", {1, 0}}, {"-1", {0, 0}}}, {{"1", {0, 1}}}});
    CHECK(testing::errorKind([&] { windingNumber(f, unit); }) == ErrorKind::ZeroOnSphere);
  }
}

TEST_CASE("brouwer degree") {
  const BallSpec s2(Vec{0, 0, 0}, 1.0);
  const auto id = brouwerDegree(PolyMap::identity(3), s2);
  CHECK(id.degree == 1);
  CHECK(id.residual < 0.1);
  CHECK(brouwerDegree(makeMap(3, {{{"1", {1, 0, 0}}}, {{"1", {0, 1, 0}}}, {{"-1", {0, 0, 1}}}}), s2).degree == -1);

  // Suspension of z^2 has degree 2; a reflection negates it.
  const PolyMap susp = makeMap(3, {{{"1", {2, 0, 0}}, {"-1", {0, 2, 0}}}, {{"2", {1, 1, 0}}}, {{"1", {0, 0, 1}}}});
  const PolyMap reflected = makeMap(3, {{{"1", {2, 0, 0}}, {"-1", {0, 2, 0}}}, {{"2", {1, 1, 0}}}, {{"-1", {0, 0, 1}}}});
  const auto ds = brouwerDegree(susp, s2);
  CHECK(ds.degree == 2);
  CHECK(ds.residual < 0.1);
  CHECK(brouwerDegree(reflected, s2).degree == -2);

  CHECK(brouwerDegree(powerMap(2), BallSpec(Vec{0, 0}, 1.0)).degree == 2);
  CHECK(brouwerDegree(makeMap(1, {{{"1", {2}}}}), BallSpec(Vec{0}, 0.5)).degree == 0);
  CHECK(brouwerDegree(makeMap(1, {{{"1", {1}}}}), BallSpec(Vec{0}, 0.5)).degree == 1);
  CHECK(brouwerDegree(makeMap(1, {{{"-1", {1}}}}), BallSpec(Vec{0}, 0.5)).degree == -1);

  CHECK(testing::errorKind([&] { brouwerDegree(PolyMap::identity(3), BallSpec(Vec{1, 0, 0}, 1.0)); }) ==
        ErrorKind::ZeroOnSphere);
}

TEST_CASE("classification table") {
  SUBCASE("planar identity is essential") {
    const auto v = classifyInessential(PolyMap::identity(2), BallSpec(Vec{0, 0}, 1.0));
    CHECK(std::optional(v.status) == VerdictStatus::Essential);
    REQUIRE(v.invariant.has_value());
    CHECK(*v.invariant == 1);
  }
  SUBCASE("cone and umbrella") {
    const auto v = classifyInessential(coneUmbrellaMap(), BallSpec(Vec{0, 0, 0}, 1.0));
    CHECK(std::optional(v.status) == VerdictStatus::InessentialAlways);
    CHECK(v.inessential());
    CHECK_FALSE(v.citations.empty());
    const auto j = v.toJson();
    for (const char* key : {"status", "invariant", "rule", "citations"}) CHECK(j.contains(key));
  }
  SUBCASE("degree matches for q = n") {
    for (const auto& f : {PolyMap::identity(3), makeMap(3, {{{"1", {2, 0, 0}}, {"-1", {0, 2, 0}}},
                                                             {{"2", {1, 1, 0}}},
                                                             {{"1", {0, 0, 1}}}})}) {
      const BallSpec b(Vec{0, 0, 0}, 1.0);
      const auto v = classifyInessential(f, b);
      REQUIRE(v.invariant.has_value());
      CHECK(*v.invariant == brouwerDegree(f, b).degree);
      CHECK(std::optional(v.status) == VerdictStatus::Essential);
    }
  }
  SUBCASE("degree zero") {
    const auto v = classifyInessential(makeMap(1, {{{"1", {2}}}}), BallSpec(Vec{0}, 1.0));
    CHECK(std::optional(v.status) == VerdictStatus::InessentialDegreeZero);
    CHECK(v.invariant == 0);
  }
  SUBCASE("fewer variables than components") {
    const auto v = classifyInessential(makeMap(1, {{{"1", {1}}}, {{"1", {2}}}}), BallSpec(Vec{0}, 1.0));
    CHECK(std::optional(v.status) == VerdictStatus::InessentialAlways);
  }
  SUBCASE("scalar maps") {
    const auto pos = classifyInessential(makeMap(2, {{{"1", {2, 0}}, {"1", {0, 2}}}}), BallSpec(Vec{0, 0}, 1.0));
    CHECK(std::optional(pos.status) == VerdictStatus::InessentialAlways);
  }
  SUBCASE("hopf map") {
    const auto v = classifyInessential(hopfMap(), BallSpec(Vec{0, 0, 0, 0}, 1.0));
    CHECK(std::optional(v.status) == VerdictStatus::Unknown);
  }
  SUBCASE("missing certificate") {
    const PolyMap f = makeMap(2, {{{"1", {2, 0}}, {"-1", {0, 2}}}});
    AnnulusCertificate bad;
    bad.center = Vec{0, 0};
    bad.outerRadius = 1.0;
    CHECK(testing::errorKind([&] { classifyInessential(f, BallSpec(Vec{0, 0}, 1.0), bad); }) ==
          ErrorKind::NoCertificate);
    CHECK(testing::errorKind([&] { classifyInessential(f, BallSpec(Vec{0, 0}, 1.0)); }) ==
          ErrorKind::NoCertificate);
  }
}

TEST_CASE("angle lifts") {
  SUBCASE("constant map") {
    const PolyMap f = makeMap(2, {{{"1", {0, 0}}}, {}});
    const auto lift = buildAngleLift(f, buildSphereMesh(BallSpec(Vec{0, 0}, 1.0), 2, 2));
    for (double t : lift.theta) CHECK(t == 0.0);
    const auto lift3 = buildAngleLift(makeMap(3, {{{"1", {0, 0, 0}}}, {}}), buildSphereMesh(BallSpec(Vec{0, 0, 0}, 1.0), 3, 1));
    CHECK(lift3.maxAbsTheta() == 0.0);
  }
  SUBCASE("right half-plane image") {
    const PolyMap f = makeMap(2, {{{"1", {2, 0}}, {"1", {0, 2}}}, {{"1", {1, 1}}}});
    const auto lift = buildAngleLift(f, buildSphereMesh(BallSpec(Vec{0, 0}, 1.0), 2, 3));
    CHECK(lift.maxAbsTheta() < kPi / 2);
    for (std::size_t i = 0; i < lift.nodes.size(); ++i) {
      const Vec v = f.evaluate(lift.nodes[i]);
      // The image stays in the right half-plane, so the principal argument is the lift.
      CHECK(lift.theta[i] == doctest::Approx(std::atan2(v[1], v[0])).epsilon(1e-12));
      const std::complex<double> z = std::exp(std::complex<double>(lift.logModulus[i], lift.theta[i]));
      CHECK(std::abs(z - std::complex<double>(v[0], v[1])) < 1e-9);
    }
    const Vec off{0.3, 0.954};
    const Vec fo = f.evaluate(std::vector<double>{0.3 / std::hypot(0.3, 0.954), 0.954 / std::hypot(0.3, 0.954)});
    CHECK(lift.thetaAt(off) == doctest::Approx(std::atan2(fo[1], fo[0])).epsilon(1e-6));
  }
  SUBCASE("winding obstructs the lift") {
    try {
      buildAngleLift(PolyMap::identity(2), buildSphereMesh(BallSpec(Vec{0, 0}, 1.0), 2, 2));
      FAIL("expected an obstruction");
    } catch (const Error& e) {
      CHECK(std::optional(e.kind()) == ErrorKind::CycleObstruction);
      CHECK(e.detail() == 1);
    }
  }
  SUBCASE("sphere lift of the cone and umbrella") {
    const auto mesh = buildSphereMesh(BallSpec(Vec{0, 0, 0}, 0.25), 3, 3);
    const auto lift = buildAngleLift(coneUmbrellaMap(), mesh);
    for (const auto& e : lift.edges) CHECK(std::abs(lift.theta[e[0]] - lift.theta[e[1]]) < kPi);
    for (std::size_t i = 0; i < lift.nodes.size(); ++i) {
      const Vec v = coneUmbrellaMap().evaluate(lift.nodes[i]);
      const std::complex<double> z = std::exp(std::complex<double>(lift.logModulus[i], lift.theta[i]));
      CHECK(std::abs(z - std::complex<double>(v[0], v[1])) < 1e-9);
    }
  }
}

TEST_CASE("null-homotopy of a constant") {
  const double eps = 0.4;
  const PolyMap f = makeMap(2, {{{"0.1", {0, 0}}}, {}});
  const Vec p{0, 0};
  const auto mesh = buildSphereMesh(BallSpec(p, 0.25), 2, 2);
  const auto phi = buildNullHomotopy(f, p, 0.5, eps, mesh);
  CHECK(phi.targetConstant()[0] == doctest::Approx(eps / 8));
  CHECK(phi.targetConstant()[1] == 0.0);
  for (double u : {0.0, 0.25, 0.5, 1.0}) {
    const Vec v = phi.evaluate(mesh.nodes[3], u);
    CHECK(v[0] == doctest::Approx(std::pow(eps / 4, 1 - u) * std::pow(eps / 8, u)));
    CHECK(std::abs(v[1]) < 1e-15);
  }
}

TEST_CASE("null-homotopy invariants") {
  struct Case {
    PolyMap f;
    Vec p;
    double delta, eps;
    int level;
  };
  const std::vector<Case> cases{
      {coneUmbrellaMap(), Vec{0, 0, 0}, 0.5, 2.0, 3},
      {makeMap(2, {{{"1", {2, 0}}, {"1", {0, 2}}}, {{"1", {1, 1}}}}), Vec{0, 0}, 2.0, 4.0, 3},
  };
  for (const auto& c : cases) {
    const auto mesh = buildSphereMesh(BallSpec(c.p, c.delta / 2), c.p.size(), c.level);
    const auto phi = buildNullHomotopy(c.f, c.p, c.delta, c.eps, mesh);
    const double cap = std::max(phi.nodeSup(), norm(phi.targetConstant()));
    CHECK(cap < c.eps / 2);
    for (const auto& x : mesh.nodes) {
      const Vec v0 = phi.evaluate(x, 0.0), fx = c.f.evaluate(x);
      CHECK(norm(testing::diff(v0, fx)) < 1e-9);
      const Vec v1 = phi.evaluate(x, 1.0);
      CHECK(norm(testing::diff(v1, phi.targetConstant())) < 1e-12);
    }
    // Dense (x, u) sample off the nodes.
    std::mt19937_64 rng(41);
    for (int k = 0; k < 10000; ++k) {
      const Vec x = testing::randomOnSphere(rng, c.p, c.delta / 2);
      const double u = (k % 101) / 100.0;
      const double m = norm(phi.evaluate(x, u));
      CHECK(m > 0.0);
      CHECK(m <= cap * (1 + 1e-9));
    }
  }
}

TEST_CASE("null-homotopy preconditions") {
  const auto mesh3 = buildSphereMesh(BallSpec(Vec{0, 0, 0}, 0.25), 3, 2);
  CHECK(testing::errorKind([&] { buildNullHomotopy(coneUmbrellaMap(), Vec{0, 0, 0}, 0.5, 0.5, mesh3); }) ==
        ErrorKind::SupNormTooLarge);
  CHECK(testing::errorKind([&] { buildNullHomotopy(PolyMap::identity(3), Vec{0, 0, 0}, 0.5, 4.0, mesh3); }) ==
        ErrorKind::NotConstructive);

  // q = 1: c carries the sign of f.
  const PolyMap neg = makeMap(2, {{{"-1", {2, 0}}, {"-1", {0, 2}}}});
  const auto phi = buildNullHomotopy(neg, Vec{0, 0}, 0.5, 1.0, buildSphereMesh(BallSpec(Vec{0, 0}, 0.25), 2, 2));
  CHECK(phi.targetConstant()[0] < 0.0);
  CHECK(phi.evaluate(Vec{0.25, 0}, 0.0)[0] == doctest::Approx(-0.0625));
}

TEST_CASE("homotopy combinators") {
  const PolyMap f = coneUmbrellaMap();
  const Field ff = fieldOf(f);
  const Vec p{0, 0, 0};
  const double delta = 0.5, r0 = delta / 2, r = 0.4, eps = 4.0;
  const auto phi = buildNullHomotopy(f, p, delta, eps, buildSphereMesh(BallSpec(p, r0), 3, 3));
  const HomotopyFn Phi = radialReparametrize(ff, phi.asFunction(), p, r0, r);
  std::mt19937_64 rng(43);

  SUBCASE("radial reparametrization") {
    double annulusMax = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const Vec y = testing::randomInBall(rng, p, r);
      if (norm(y) >= r0) annulusMax = std::max(annulusMax, norm(f.evaluate(y)));
    }
    const double phiMax = sampledMaxNorm(phi.asFunction(), haltonOnSphere(BallSpec(p, r0), 500), 21);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const Vec x = testing::randomOnSphere(rng, p, r);
      CHECK(norm(testing::diff(Phi(x, 0.0), f.evaluate(x))) == 0.0);
      CHECK(norm(testing::diff(Phi(x, 1.0), phi.targetConstant())) < 1e-12);
      const Vec half = Phi(x, 0.5);
      Vec y = x;
      for (auto& c : y) c *= r0 / r;
      CHECK(norm(testing::diff(half, f.evaluate(y))) < 1e-9);
      for (int j = 0; j <= 20; ++j) worst = std::max(worst, norm(Phi(x, j / 20.0)));
    }
    CHECK(worst <= std::max(annulusMax, phiMax) * 1.05);

    const HomotopyFn same = radialReparametrize(ff, phi.asFunction(), p, r0, r0);
    const Vec x = testing::randomOnSphere(rng, p, r0);
    CHECK(norm(testing::diff(same(x, 0.3), f.evaluate(x))) < 1e-12);
  }

  SUBCASE("clamp scaling") {
    const double M = sampledMaxNorm(Phi, haltonOnSphere(BallSpec(p, r), 300), 21);
    const double smallEps = M / 2;
    const HomotopyFn Psi = clampScale(Phi, smallEps, M, 0.5);
    for (int k = 0; k < 100; ++k) {
      const Vec x = testing::randomOnSphere(rng, p, r);
      CHECK(norm(testing::diff(Psi(x, 0.0), Phi(x, 0.0))) < 1e-15);
      CHECK(norm(Psi(x, 1.0)) == doctest::Approx(smallEps / (2 * M) * norm(phi.targetConstant())));
      CHECK(norm(Psi(x, 1.0)) <= smallEps / 2);
    }
    const HomotopyFn same = clampScale(Phi, 2 * M, M, 0.5);
    const Vec x = testing::randomOnSphere(rng, p, r);
    CHECK(same(x, 0.7) == Phi(x, 0.7));
  }

  SUBCASE("cone extension") {
    const HomotopyFn Theta = coneExtend(ff, Phi, p, r);
    for (int k = 0; k < 1000; ++k) {
      const Vec x = testing::randomInBall(rng, p, r);
      if (norm(x) < 1e-3) continue;
      Vec y = x;
      const double s = norm(x);
      for (auto& c : y) c *= r / s;
      // Both branches meet at u = 1/2 on the radial projection.
      CHECK(norm(testing::diff(Theta(x, 0.5), Phi(y, 0.0))) < 1e-9);
      CHECK(norm(testing::diff(Theta(x, 0.5 - 1e-12), Theta(x, 0.5 + 1e-12))) < 1e-9);
      CHECK(norm(testing::diff(Theta(x, 1.0), phi.targetConstant())) < 1e-12);
    }
    const Vec xs = testing::randomOnSphere(rng, p, r);
    CHECK(norm(testing::diff(Theta(xs, 0.0), f.evaluate(xs))) < 1e-12);
    CHECK(testing::errorKind([&] { Theta(p, 0.3); }) == ErrorKind::EvaluationAtCenter);
  }
}

TEST_CASE("certificate from a polynomial family") {
  const PolyMap F = coneUmbrellaHomotopy();
  const HomotopyFn Fh = [F](std::span<const double> x, double t) {
    Vec xt(x.begin(), x.end());
    xt.push_back(t);
    return F.evaluate(xt);
  };
  const Vec p{0, 0, 0};
  const double delta = 0.5;
  const auto data = certificateFromHomotopy(Fh, p, 0.3, delta, 4.0, 500, 11);
  CHECK(data.minNorm > 0.0);
  CHECK(data.withinEpsilon);
  const Vec end = Fh(p, delta / 2);
  CHECK(norm(testing::diff(data.endpoint, end)) < 1e-15);
  std::mt19937_64 rng(47);
  for (int k = 0; k < 20; ++k) {
    const Vec x = testing::randomOnSphere(rng, p, 0.3);
    CHECK(norm(testing::diff(data.theta(x, 0.0), coneUmbrellaMap().evaluate(x))) < 1e-12);
    CHECK(norm(testing::diff(data.theta(x, 1.0), end)) < 1e-15);
  }

  // A family that ignores t keeps the zero at p.
  const HomotopyFn stuck = [](std::span<const double> x, double) { return Vec{x[0], x[1]}; };
  CHECK(testing::errorKind([&] { certificateFromHomotopy(stuck, Vec{0, 0}, 0.3, delta, 4.0, 100, 5); }) ==
        ErrorKind::ZeroDetected);
}

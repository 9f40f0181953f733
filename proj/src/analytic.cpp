#include "isozero/analytic.hpp"

#include "isozero/error.hpp"
#include "isozero/rational.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace isozero {

namespace {

constexpr double kPi = std::numbers::pi;

Field fieldOfComplex(const ComplexField& g) {
  return [g](std::span<const double> x) {
    const Complex z = g(x);
    return Vec{z.real(), z.imag()};
  };
}

Complex complexOf(const PolyMap& f, std::span<const double> x) {
  const Vec v = f.evaluate(x);
  return {v[0], v[1]};
}

Complex ipow(Complex z, int k) {
  Complex r(1.0, 0.0);
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

// Exact log f at the radial projection of x onto the lift's sphere.
Complex logOnSphere(const AngleLift& lift, std::span<const double> x) {
  const auto& c = lift.ball.center;
  const double r = distance(x, c);
  if (r == 0.0) throw Error(ErrorKind::EvaluationAtCenter, "no radial projection of the center");
  const Vec y = radialPoint(c, x, lift.ball.radius / r);
  const Vec v = lift.field(y);
  const double mod = std::hypot(v[0], v[1]);
  return {std::log(mod), lift.thetaAt(y)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Complexification

Complex ComplexifiedPolynomial::evaluate(Complex z) const {
  Complex acc(0.0, 0.0);
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
  return acc;
}

HomotopyFn ComplexifiedPolynomial::asHomotopy() const {
  auto self = std::make_shared<const ComplexifiedPolynomial>(*this);
  return [self](std::span<const double> x, double t) {
    const Complex v = self->evaluate({x[0], t});
    return Vec{v.real(), v.imag()};
  };
}

ComplexifiedPolynomial complexify1d(const PolyMap& f, double rho0) {
  if (f.n() != 1 || f.q() != 2) throw Error(ErrorKind::DimensionMismatch, "complexification needs f: R -> R^2");
  if (!(rho0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "rho0 must be positive");
  ComplexifiedPolynomial out;
  const int deg = std::max(0, f.degree());
  out.coefficients.assign(static_cast<std::size_t>(deg) + 1, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < 2; ++i) {
    for (const auto& [e, c] : f.component(i).terms()) {
      const double v = toDouble(c);
      out.coefficients[static_cast<std::size_t>(e[0])] += i == 0 ? Complex(v, 0.0) : Complex(0.0, v);
    }
  }
  while (out.coefficients.size() > 1 && out.coefficients.back() == Complex(0.0, 0.0)) out.coefficients.pop_back();
  const auto& a = out.coefficients;
  if (a.size() == 1 && a[0] == Complex(0.0, 0.0))
    throw Error(ErrorKind::NonIsolatedComplexZero, "F vanishes identically");
  std::size_t v = 0;
  while (a[v] == Complex(0.0, 0.0)) ++v;
  if (v == 0) throw Error(ErrorKind::InvalidArgument, "f(0) != 0, the origin is not a zero");

  out.roots.assign(v, Complex(0.0, 0.0));
  const std::size_t m = a.size() - 1 - v;
  if (m > 0) {
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    const Complex lead = a.back();
    for (std::size_t j = 0; j < m; ++j) C(0, static_cast<Eigen::Index>(j)) = -a[a.size() - 2 - j] / lead;
    for (std::size_t j = 1; j < m; ++j) C(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1)) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) out.roots.push_back(es.eigenvalues()(j));
  }
  std::size_t nonzeroInside = 0;
  std::vector<Complex> distinct;
  for (const Complex& r : out.roots) {
    if (std::abs(r) >= rho0) continue;
    out.rootsInside.push_back(r);
    if (std::abs(r) > 1e-8) ++nonzeroInside;
    if (std::none_of(distinct.begin(), distinct.end(), [&](Complex d) { return std::abs(d - r) < 1e-8; }))
      distinct.push_back(r);
  }
  out.distinctRootsInside = distinct.size();
  if (nonzeroInside > 0)
    throw Error(ErrorKind::NonIsolatedComplexZero, "F has a nonzero root inside the disk",
                static_cast<long>(nonzeroInside));
  return out;
}

// ---------------------------------------------------------------------------
// Poisson integral

HarmonicField::HarmonicField(SphereQuadrature quadrature, std::vector<Complex> data)
    : quad_(std::move(quadrature)), data_(std::move(data)) {
  if (quad_.nodes.size() != data_.size() || quad_.weights.size() != data_.size())
    throw Error(ErrorKind::DimensionMismatch, "one boundary value per quadrature node");
  if (data_.empty()) throw Error(ErrorKind::InvalidArgument, "empty quadrature");
}

Complex HarmonicField::evaluate(std::span<const double> x) const {
  const auto& c = quad_.ball.center;
  const double R = quad_.ball.radius;
  const std::size_t n = c.size();
  if (x.size() != n) throw Error(ErrorKind::DimensionMismatch, "point dimension");
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
  if (std::sqrt(r2) > 0.95 * R * (1.0 + 1e-12))
    throw Error(ErrorKind::EvalTooCloseToBoundary, "Poisson integral evaluated beyond 0.95 R");
  const double a = R * R - r2;
  Complex num(0.0, 0.0);
  double den = 0.0;
  for (std::size_t j = 0; j < data_.size(); ++j) {
    const auto& xi = quad_.nodes[j];
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (x[i] - xi[i]) * (x[i] - xi[i]);
    const double dn = n == 2 ? d2 : std::pow(d2, 0.5 * static_cast<double>(n));
    const double w = quad_.weights[j] * a / dn;
    num += w * data_[j];
    den += w;
  }
  return num / den;
}

SphereQuadrature defaultPoissonQuadrature(const BallSpec& ball, std::size_t n) {
  if (n == 3) return gaussProductQuadrature(ball, 45, 90);
  if (n != 2) throw Error(ErrorKind::UnsupportedDimension, "Poisson quadrature for n in {2, 3}");
  SphereQuadrature q;
  q.ball = ball;
  const std::size_t N = 2048;
  for (std::size_t j = 0; j < N; ++j) {
    const double phi = 2.0 * kPi * static_cast<double>(j) / N;
    q.nodes.push_back({ball.center[0] + ball.radius * std::cos(phi), ball.center[1] + ball.radius * std::sin(phi)});
    q.weights.push_back(2.0 * kPi * ball.radius / N);
  }
  return q;
}

HarmonicField poissonSolveBall(const SphereQuadrature& quadrature, std::vector<Complex> boundaryValues) {
  return HarmonicField(quadrature, std::move(boundaryValues));
}

HarmonicField poissonSolveBall(const SphereQuadrature& quadrature, const ComplexField& boundary) {
  std::vector<Complex> data(quadrature.nodes.size());
  parallelFor(data.size(), [&](std::size_t j) { data[j] = boundary(quadrature.nodes[j]); });
  return HarmonicField(quadrature, std::move(data));
}

BoundaryMultiplier::BoundaryMultiplier(HarmonicField u, std::shared_ptr<const AngleLift> sphereLift)
    : u_(std::move(u)), lift_(std::move(sphereLift)) {
  if (!lift_) throw Error(ErrorKind::InvalidArgument, "multiplier needs the sphere lift");
}

Complex BoundaryMultiplier::boundaryLog(std::span<const double> x) const { return logOnSphere(*lift_, x); }

Complex BoundaryMultiplier::logValue(std::span<const double> x) const {
  const auto& c = u_.ball().center;
  const double R = u_.ball().radius;
  const double r = distance(x, c);
  if (r <= 0.95 * R) return u_.evaluate(x);
  if (r > R * (1.0 + 1e-12)) throw Error(ErrorKind::RadiusOutOfDomain, "multiplier evaluated outside its ball");
  const double s = std::min(1.0, (r - 0.95 * R) / (0.05 * R));
  const Vec inner = radialPoint(c, x, 0.95 * R / r);
  return (1.0 - s) * u_.evaluate(inner) + s * boundaryLog(x);
}

// ---------------------------------------------------------------------------
// Polar lift and roots

AngleLift polarLift(const ComplexField& mf, const BallSpec& ball, int meshLevel, int layers) {
  if (layers < 1) throw Error(ErrorKind::InvalidArgument, "at least one layer");
  const SphereMesh mesh = buildSphereMesh(ball, ball.dim(), meshLevel);
  const std::size_t N = mesh.nodes.size();
  std::vector<Vec> nodes;
  std::vector<std::array<std::size_t, 2>> edges;
  nodes.reserve(N * static_cast<std::size_t>(layers));
  for (int L = 0; L < layers; ++L) {
    const double scale = static_cast<double>(layers - L) / layers;
    for (const auto& v : mesh.nodes) nodes.push_back(radialPoint(ball.center, v, scale));
    const std::size_t off = N * static_cast<std::size_t>(L);
    for (const auto& e : mesh.edges) edges.push_back({off + e[0], off + e[1]});
    if (L > 0)
      for (std::size_t j = 0; j < N; ++j) edges.push_back({off - N + j, off + j});
  }
  Vec base = ball.center;
  base[0] += ball.radius;
  return buildAngleLiftOnGraph(fieldOfComplex(mf), ball, std::move(nodes), std::move(edges),
                               mesh.nearestNode(base));
}

int chooseRootOrder(double supTheta) {
  if (!std::isfinite(supTheta) || supTheta < 0.0) throw Error(ErrorKind::ThetaUnbounded, "sup |theta| is not finite");
  const double k = std::floor(supTheta / (kPi / 2.0)) + 1.0;
  if (k > 1e6) throw Error(ErrorKind::ThetaUnbounded, "root order out of range");
  return static_cast<int>(k);
}

int chooseRootOrder(const AngleLift& coarse, const AngleLift& refined) {
  const double a = coarse.maxAbsTheta();
  const double b = refined.maxAbsTheta();
  if (b > 2.0 * a + kPi / 2.0)
    throw Error(ErrorKind::ThetaUnbounded, "sup |theta| grows under refinement");
  return chooseRootOrder(std::max(a, b));
}

RootField::RootField(ComplexField mf, std::shared_ptr<const AngleLift> lift, int k)
    : mf_(std::move(mf)), lift_(std::move(lift)), k_(k) {
  if (!lift_) throw Error(ErrorKind::InvalidArgument, "root field needs a lift");
  if (k_ < 1) throw Error(ErrorKind::InvalidArgument, "root order must be positive");
  center_ = lift_->ball.center;
}

Complex RootField::evaluate(std::span<const double> x) const {
  if (distance(x, center_) == 0.0) return {0.0, 0.0};
  const Complex z = mf_(x);
  const double mod = std::pow(std::abs(z), 1.0 / k_);
  // Too small to lift; the modulus alone is within 1e-12^(1/k) of the value.
  if (std::abs(z) < 1e-12) return {mod, 0.0};
  return std::polar(mod, lift_->thetaAt(x) / k_);
}

RootField kthRootField(const ComplexField& mf, std::shared_ptr<const AngleLift> lift, int k, std::size_t samples) {
  const double sup = lift->maxAbsTheta();
  if (sup / k >= kPi / 2.0)
    throw Error(ErrorKind::AngleBudgetExceeded, "sup |theta|/k reaches pi/2", k);
  RootField root(mf, lift, k);
  const BallSpec& ball = lift->ball;

  const auto pts = haltonInBall(ball, samples);
  std::vector<double> re(pts.size()), ang(pts.size());
  parallelFor(pts.size(), [&](std::size_t i) {
    const Complex g = root.evaluate(pts[i]);
    re[i] = g.real();
    ang[i] = std::abs(g) > 0.0 ? std::abs(std::arg(g)) : 0.0;
  });
  double minRe = std::numeric_limits<double>::infinity(), maxAng = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    minRe = std::min(minRe, re[i]);
    maxAng = std::max(maxAng, ang[i]);
  }
  double boundaryErr = 0.0;
  for (std::size_t i = 0; i < lift->nodes.size(); ++i) {
    if (std::abs(distance(lift->nodes[i], ball.center) - ball.radius) > 1e-12 * ball.radius) continue;
    boundaryErr = std::max(boundaryErr, std::abs(root.evaluate(lift->nodes[i]) - Complex(1.0, 0.0)));
  }
  Report rep;
  rep.add("root-half-plane", CheckTag::RootHalfPlane, minRe, -1e-9, minRe >= -1e-9, "min Re over ball samples");
  rep.add("root-angle-budget", CheckTag::RootHalfPlane, maxAng, kPi / 2.0, maxAng < kPi / 2.0,
          "max |arg| of the root over ball samples");
  rep.add("root-boundary-unit", CheckTag::BoundaryAgreement, boundaryErr, 1e-6, boundaryErr <= 1e-6,
          "max |root - 1| on the outer sphere nodes");
  root.setReport(std::move(rep));
  return root;
}

HolderReport holderCheck(const ComplexField& g, int k, const std::vector<Vec>& samples, std::size_t pairBudget) {
  if (samples.size() < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be positive");
  std::vector<Complex> vals(samples.size());
  parallelFor(samples.size(), [&](std::size_t i) { vals[i] = g(samples[i]); });

  std::mt19937_64 rng(0x5eed'1dc0ffeeULL);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(pairBudget);
  while (pairs.size() < pairBudget) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i == j || distance(samples[i], samples[j]) == 0.0) continue;
    pairs.emplace_back(i, j);
  }
  HolderReport out;
  out.pairs = pairs.size();
  for (const auto& [i, j] : pairs) {
    const double d = distance(samples[i], samples[j]);
    out.C1 = std::max(out.C1, std::abs(ipow(vals[i], k) - ipow(vals[j], k)) / d);
  }
  out.C2 = 2.0 * k * std::pow(out.C1, 1.0 / k);
  for (const auto& [i, j] : pairs) {
    const double d = distance(samples[i], samples[j]);
    const double lhs = std::abs(vals[i] - vals[j]);
    const double rhs = out.C2 * std::pow(d, 1.0 / k);
    out.worstRatio = std::max(out.worstRatio, rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0));
  }
  out.pass = out.worstRatio <= 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Half-ball Dirichlet problem

std::size_t HalfBallSolution::index(std::span<const std::size_t> ix, std::size_t it) const {
  std::size_t idx = it;
  for (std::size_t k = n; k-- > 0;) idx = idx * gridRes + ix[k];
  return idx;
}

Complex HalfBallSolution::interpolate(std::span<const double> x, double s) const {
  if (x.size() != n) throw Error(ErrorKind::DimensionMismatch, "point dimension");
  if (s < 0.0) throw Error(ErrorKind::RadiusOutOfDomain, "negative half-ball height");
  double r2 = s * s;
  for (std::size_t k = 0; k < n; ++k) r2 += (x[k] - p[k]) * (x[k] - p[k]);
  if (std::sqrt(r2) > rho2 * (1.0 + 1e-9)) throw Error(ErrorKind::RadiusOutOfDomain, "outside the half ball");

  std::array<std::size_t, 3> i0{};
  std::array<double, 3> fr{};
  for (std::size_t k = 0; k < n; ++k) {
    const double u = std::clamp((x[k] - p[k] + rho2) / h, 0.0, static_cast<double>(gridRes - 1));
    i0[k] = std::min(static_cast<std::size_t>(u), gridRes - 2);
    fr[k] = u - static_cast<double>(i0[k]);
  }
  // Multilinear in x on layer `it`.
  auto layer = [&](std::size_t it) {
    Complex acc(0.0, 0.0);
    std::array<std::size_t, 3> ix{};
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      double w = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        const bool up = (corner >> k) & 1u;
        ix[k] = i0[k] + (up ? 1 : 0);
        w *= up ? fr[k] : 1.0 - fr[k];
      }
      if (w != 0.0) acc += w * values[index(std::span<const std::size_t>(ix.data(), n), it)];
    }
    return acc;
  };
  const double ut = s / h;
  if (ut < 1.0) return (1.0 - ut) * flatData(x) + ut * layer(1);
  const std::size_t t0 = std::min(static_cast<std::size_t>(ut), tRes - 2);
  const double ft = ut - static_cast<double>(t0);
  return (1.0 - ft) * layer(t0) + ft * layer(t0 + 1);
}

double HalfBallSolution::minInteriorReal() const {
  const double exclusion = h * std::sqrt(static_cast<double>(n + 1));
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ix(n);
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    if (status[idx] != 1) continue;
    std::size_t rest = idx;
    double r2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = static_cast<double>(rest % gridRes) * h - rho2;
      r2 += d * d;
      rest /= gridRes;
    }
    const double t = static_cast<double>(rest) * h;
    r2 += t * t;
    if (std::sqrt(r2) <= exclusion) continue;
    best = std::min(best, values[idx].real());
  }
  return best;
}

namespace {

struct StencilRow {
  std::size_t node = 0;
  double diag = 0.0;
  Complex rhs{0.0, 0.0};
  std::array<std::uint32_t, 8> nb{};
  std::array<double, 8> w{};
  unsigned char count = 0;
};

}  // namespace

HalfBallSolution dirichletHalfBall(const ComplexField& flatData, const HalfBallBoundary& hemisphereData,
                                   std::span<const double> p, double rho2, const HalfBallOptions& options) {
  const std::size_t n = p.size();
  if (n < 1 || n > 3) throw Error(ErrorKind::UnsupportedDimension, "half-ball solver supports n in {1, 2, 3}");
  if (!(rho2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "rho2 must be positive");
  const std::size_t N = options.gridRes;
  if (N < 5 || N % 2 == 0) throw Error(ErrorKind::InvalidArgument, "gridRes must be odd and at least 5");
  const std::size_t T = (N - 1) / 2 + 1;
  double totalD = static_cast<double>(T);
  for (std::size_t k = 0; k < n; ++k) totalD *= static_cast<double>(N);
  if (totalD > static_cast<double>(options.maxNodes))
    throw Error(ErrorKind::InvalidArgument, "half-ball grid exceeds the node cap", static_cast<long>(totalD));

  HalfBallSolution S;
  S.p.assign(p.begin(), p.end());
  S.rho2 = rho2;
  S.n = n;
  S.gridRes = N;
  S.tRes = T;
  S.h = 2.0 * rho2 / static_cast<double>(N - 1);
  S.flatData = flatData;
  const double h = S.h;
  const std::size_t total = static_cast<std::size_t>(totalD);
  S.values.assign(total, Complex(1.0, 0.0));
  S.status.assign(total, 0);

  std::vector<std::size_t> strides(n + 1, 1);
  for (std::size_t k = 1; k <= n; ++k) strides[k] = strides[k - 1] * N;

  // Relative coordinates (x - p, t) of a node.
  auto coords = [&](std::size_t idx, std::array<double, 4>& c) {
    std::size_t rest = idx;
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = static_cast<double>(rest % N) * h - rho2;
      rest /= N;
    }
    c[n] = static_cast<double>(rest) * h;
  };
  auto absPoint = [&](const std::array<double, 4>& c) {
    Vec x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = p[k] + c[k];
    return x;
  };
  auto hemi = [&](const std::array<double, 4>& c) { return hemisphereData(absPoint(c), c[n]); };

  std::vector<std::size_t> flatNodes, curvedNodes;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::array<double, 4> c{};
    coords(idx, c);
    double rx2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) rx2 += c[k] * c[k];
    const double r = std::sqrt(rx2 + c[n] * c[n]);
    if (idx < strides[n]) {
      if (std::sqrt(rx2) <= rho2 * (1.0 + 1e-12)) {
        S.status[idx] = 2;
        flatNodes.push_back(idx);
      }
    } else if (r < rho2 * (1.0 - 1e-9)) {
      S.status[idx] = 1;
    } else {
      S.status[idx] = r <= rho2 * (1.0 + 1e-12) ? 3 : 0;
      curvedNodes.push_back(idx);
    }
  }
  parallelFor(flatNodes.size(), [&](std::size_t j) {
    std::array<double, 4> c{};
    coords(flatNodes[j], c);
    S.values[flatNodes[j]] = flatData(absPoint(c));
  });
  // Curved Dirichlet nodes take their own data; outside nodes take the data
  // at their radial projection so interpolation near the rim stays continuous.
  parallelFor(curvedNodes.size(), [&](std::size_t j) {
    std::array<double, 4> c{};
    coords(curvedNodes[j], c);
    double r = 0.0;
    for (std::size_t k = 0; k <= n; ++k) r += c[k] * c[k];
    r = std::sqrt(r);
    if (r > rho2)
      for (std::size_t k = 0; k <= n; ++k) c[k] *= rho2 / r;
    S.values[curvedNodes[j]] = hemi(c);
  });

  // Stencils, scaled by h^2. Along each axis the three-point formula with
  // arm lengths a (minus side) and b (plus side) has weights 2/(a(a+b)),
  // 2/(b(a+b)) and diagonal 2/(ab).
  std::array<std::vector<StencilRow>, 2> rows;
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (S.status[idx] != 1) continue;
    std::array<double, 4> c{};
    coords(idx, c);
    double r2 = 0.0;
    for (std::size_t k = 0; k <= n; ++k) r2 += c[k] * c[k];
    StencilRow row;
    row.node = idx;
    std::size_t parity = 0;
    {
      std::size_t rest = idx;
      for (std::size_t k = 0; k <= n; ++k) {
        parity += k < n ? rest % N : rest;
        rest /= N;
      }
    }
    for (std::size_t a = 0; a <= n; ++a) {
      std::array<double, 2> arm{1.0, 1.0};
      std::array<Complex, 2> fixedVal{};
      std::array<long, 2> nbIdx{-1, -1};
      for (int side = 0; side < 2; ++side) {
        const int dir = side == 0 ? -1 : 1;
        const std::size_t nb = dir < 0 ? idx - strides[a] : idx + strides[a];
        const unsigned char st = S.status[nb];
        if (st == 1) {
          nbIdx[side] = static_cast<long>(nb);
        } else if (st == 2 || st == 3) {
          fixedVal[side] = S.values[nb];
        } else {
          const double others = r2 - c[a] * c[a];
          const double sdist = std::sqrt(std::max(0.0, rho2 * rho2 - others)) - dir * c[a];
          arm[side] = std::clamp(sdist / h, 1e-12, 1.0);
          std::array<double, 4> q = c;
          q[a] += dir * arm[side] * h;
          fixedVal[side] = hemi(q);
        }
      }
      const double am = arm[0], ap = arm[1];
      const double wm = 2.0 / (am * (am + ap)), wp = 2.0 / (ap * (am + ap));
      row.diag += 2.0 / (am * ap);
      const std::array<double, 2> ws{wm, wp};
      for (int side = 0; side < 2; ++side) {
        if (nbIdx[side] >= 0) {
          row.nb[row.count] = static_cast<std::uint32_t>(nbIdx[side]);
          row.w[row.count] = ws[side];
          ++row.count;
        } else {
          row.rhs += ws[side] * fixedVal[side];
        }
      }
    }
    rows[parity % 2].push_back(row);
  }

  const double omega = options.omega;
  const std::size_t chunk = 4096;
  auto sweep = [&](std::vector<StencilRow>& color) {
    const std::size_t chunks = (color.size() + chunk - 1) / chunk;
    std::vector<double> chunkMax(chunks, 0.0);
    parallelFor(chunks, [&](std::size_t ci) {
      const std::size_t end = std::min(color.size(), (ci + 1) * chunk);
      double mx = 0.0;
      for (std::size_t i = ci * chunk; i < end; ++i) {
        const StencilRow& row = color[i];
        Complex sum = row.rhs;
        for (unsigned char j = 0; j < row.count; ++j) sum += row.w[j] * S.values[row.nb[j]];
        Complex& v = S.values[row.node];
        const Complex delta = omega * (sum / row.diag - v);
        v += delta;
        mx = std::max(mx, std::abs(delta));
      }
      chunkMax[ci] = mx;
    });
    double mx = 0.0;
    for (double m : chunkMax) mx = std::max(mx, m);
    return mx;
  };

  std::vector<double> history;
  const std::size_t lag = 10;
  for (std::size_t it = 1; it <= options.maxIterations; ++it) {
    const double d = std::max(sweep(rows[0]), sweep(rows[1]));
    history.push_back(d);
    S.iterations = it;
    if (d == 0.0) {
      S.errorEstimate = 0.0;
      return S;
    }
    if (it > lag) {
      const double rho = std::pow(d / history[it - 1 - lag], 1.0 / lag);
      S.errorEstimate = rho < 1.0 ? d / (1.0 - rho) : std::numeric_limits<double>::infinity();
      if (S.errorEstimate < options.tolSolve) return S;
    }
  }
  throw Error(ErrorKind::NoConvergence, "SOR did not reach tolSolve", static_cast<long>(options.maxIterations));
}

// ---------------------------------------------------------------------------
// Assembly

ExtensionField::ExtensionField(std::shared_ptr<const HalfBallSolution> H, int k, ComplexField multiplier,
                               double rho6)
    : H_(std::move(H)), k_(k), m_(std::move(multiplier)), rho6_(rho6) {
  if (!H_) throw Error(ErrorKind::InvalidArgument, "extension needs a half-ball solution");
  if (k_ < 1) throw Error(ErrorKind::InvalidArgument, "k must be positive");
  if (!(rho6 > 0.0 && rho6 < H_->rho2)) throw Error(ErrorKind::InvalidArgument, "rho6 must lie in (0, rho2)");
}

Complex ExtensionField::evaluateH2(std::span<const double> x, double t) const {
  return H_->interpolate(x, t * t);
}

Vec ExtensionField::evaluate(std::span<const double> x, double t) const {
  const Complex Hk = ipow(evaluateH2(x, t), k_);
  const Complex m = m_(x);
  if (std::abs(m) < 1e-12) throw Error(ErrorKind::MultiplierUnderflow, "|m(x)| below 1e-12");
  const Complex F = Hk / m;
  return {F.real(), F.imag()};
}

HomotopyFn ExtensionField::asFunction() const {
  auto self = std::make_shared<const ExtensionField>(*this);
  return [self](std::span<const double> x, double t) { return self->evaluate(x, t); };
}

ExtensionField assembleExtension(std::shared_ptr<const HalfBallSolution> H, int k, const ComplexField& multiplier,
                                 double rho6) {
  return ExtensionField(std::move(H), k, multiplier, rho6);
}

ExtensionReport checkExtension(const ExtensionField& F, const PolyMap& f, double C3, std::size_t perShell) {
  const auto& p = F.H().p;
  const std::size_t n = p.size();
  const double rho6 = F.rho6();
  const int k = F.k();
  ExtensionReport out;
  const std::size_t shells = 10;
  for (std::size_t j = 0; j < shells; ++j)
    out.shellRadii.push_back(rho6 * (0.1 + 0.9 * static_cast<double>(j) / (shells - 1)));

  // F(x, 0) against f on x shells.
  for (double r : out.shellRadii) {
    const auto xs = haltonOnSphere(BallSpec(p, r), perShell);
    std::vector<double> rel(xs.size());
    parallelFor(xs.size(), [&](std::size_t i) {
      const Vec a = F.evaluate(xs[i], 0.0);
      const Vec b = f.evaluate(xs[i]);
      rel[i] = std::hypot(a[0] - b[0], a[1] - b[1]) / std::hypot(b[0], b[1]);
    });
    for (double e : rel) out.maxRelativeT0Error = std::max(out.maxRelativeT0Error, e);
  }

  // (x, t) shells in R^{n+1}; t is taken as |t|.
  Vec origin(n + 1, 0.0);
  auto ratios = [&](const std::vector<Vec>& pts, double& minNorm, double& maxC, double& maxC3) {
    std::vector<double> nrm(pts.size()), c(pts.size()), c3(pts.size());
    parallelFor(pts.size(), [&](std::size_t i) {
      Vec x(pts[i].begin(), pts[i].begin() + static_cast<long>(n));
      for (std::size_t a = 0; a < n; ++a) x[a] += p[a];
      const double t = std::abs(pts[i][n]);
      const double rr = norm(pts[i]);
      const Vec v = F.evaluate(x, t);
      nrm[i] = std::hypot(v[0], v[1]);
      c[i] = nrm[i] / rr;
      c3[i] = std::abs(F.evaluateH2(x, t)) / std::pow(rr, 1.0 / k);
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
      minNorm = std::min(minNorm, nrm[i]);
      maxC = std::max(maxC, c[i]);
      maxC3 = std::max(maxC3, c3[i]);
    }
  };
  for (double r : out.shellRadii) {
    double mn = std::numeric_limits<double>::infinity(), c = 0.0;
    ratios(haltonOnSphere(BallSpec(origin, r), perShell), mn, c, out.C3Observed);
    out.shellMinima.push_back(mn);
    out.C = std::max(out.C, c);
  }
  double innerMin = std::numeric_limits<double>::infinity(), innerC = 0.0;
  {
    auto inner = haltonInBall(BallSpec(origin, rho6), 4 * perShell);
    std::erase_if(inner, [](const Vec& v) { return norm(v) == 0.0; });
    ratios(inner, innerMin, innerC, out.C3Observed);
  }

  const double shellMin = *std::min_element(out.shellMinima.begin(), out.shellMinima.end());
  auto& rep = out.checks;
  rep.add("t0-agreement", CheckTag::BoundaryAgreement, out.maxRelativeT0Error, 0.02, out.maxRelativeT0Error <= 0.02,
          "max relative |F(x,0) - f(x)| on shells [0.1, 1] rho6");
  rep.add("shell-minimum-positive", CheckTag::ShellMinimumPositive, std::min(shellMin, innerMin), 0.0,
          shellMin > 0.0 && innerMin > 0.0, "min |F| over (x, t) shells and interior samples");
  rep.add("cone-linear-bound", CheckTag::ConeLinearBound, innerC, 1.05 * out.C, innerC <= 1.05 * out.C,
          "interior |F|/|(x,t)| against C estimated on shells");
  rep.add("root-boundary-bound", CheckTag::RootBoundaryBound, out.C3Observed, C3, out.C3Observed <= C3,
          "|H(x,t^2)| / |(x,t)|^(1/k) against C3");
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

nlohmann::json AnalyticResult::manifest() const {
  nlohmann::json j;
  j["rho2"] = rho2;
  j["rho3"] = rho3;
  j["rho6"] = rho6;
  j["winding"] = winding;
  j["verdict"] = verdict.toJson();
  j["supTheta"] = supTheta;
  j["k"] = k;
  j["holder"] = {{"C1", holder.C1}, {"C2", holder.C2}, {"worstRatio", holder.worstRatio}, {"pairs", holder.pairs},
                 {"pass", holder.pass}};
  if (H)
    j["grid"] = {{"gridRes", H->gridRes}, {"h", H->h}, {"iterations", H->iterations},
                 {"errorEstimate", H->errorEstimate}};
  j["C"] = extension.C;
  j["C3Observed"] = extension.C3Observed;
  j["maxRelativeT0Error"] = extension.maxRelativeT0Error;
  j["shellRadii"] = extension.shellRadii;
  j["shellMinima"] = extension.shellMinima;
  j["checks"] = checks.toJson();
  return j;
}

AnalyticResult runAnalyticPipeline(const PolyMap& f, std::span<const double> p, const AnalyticOptions& options) {
  if (f.q() != 2) throw Error(ErrorKind::DimensionMismatch, "the analytic construction needs q = 2");
  const std::size_t n = f.n();
  if (n != 2 && n != 3) throw Error(ErrorKind::UnsupportedDimension, "analytic pipeline supports n in {2, 3}");
  if (p.size() != n) throw Error(ErrorKind::DimensionMismatch, "base point dimension");
  const double R = options.isolationRadius;
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidArgument, "isolation radius must be positive");

  AnalyticResult res;
  const Vec center(p.begin(), p.end());
  res.rho2 = R / 2.0;
  res.rho3 = std::min(1.2 * res.rho2, R);
  res.rho6 = 0.8 * res.rho2;
  const BallSpec outer(center, R);
  const BallSpec inner(center, res.rho2);

  res.verdict = classifyInessential(f, outer);
  if (n == 2) {
    res.winding = windingNumber(f, inner);
    if (res.winding != 0) throw Error(ErrorKind::CycleObstruction, "nonzero winding on S(p, rho2)", res.winding);
  }
  if (!res.verdict.inessential()) throw Error(ErrorKind::NotConstructive, "zero is not inessential");
  res.checks.add("isolation-certificate", CheckTag::IsolationCertificate, 1.0, 1.0, true,
                 "adaptive certificate on [R/20, R]");

  auto fShared = std::make_shared<const PolyMap>(f);
  const SphereMesh mesh = buildSphereMesh(inner, n, options.liftLevel);
  res.sphereLift = std::make_shared<const AngleLift>(buildAngleLift(f, mesh));
  const auto quad = defaultPoissonQuadrature(inner, n);
  auto lift = res.sphereLift;
  HarmonicField u = poissonSolveBall(quad, [lift](std::span<const double> y) { return logOnSphere(*lift, y); });
  res.multiplier = std::make_shared<const BoundaryMultiplier>(std::move(u), res.sphereLift);
  auto mult = res.multiplier;
  const ComplexField m = [mult](std::span<const double> x) { return mult->evaluate(x); };
  const ComplexField mf = [mult, fShared](std::span<const double> x) {
    return mult->evaluate(x) * complexOf(*fShared, x);
  };

  double normErr = 0.0;
  for (const auto& v : mesh.nodes) normErr = std::max(normErr, std::abs(mf(v) - Complex(1.0, 0.0)));
  res.checks.add("multiplier-normalization", CheckTag::BoundaryAgreement, normErr, 1e-6, normErr <= 1e-6,
                 "max |m f - 1| on the rho2 sphere nodes");

  res.polar = std::make_shared<const AngleLift>(polarLift(mf, inner, options.liftLevel));
  if (options.refineCheck) {
    const AngleLift refined = polarLift(mf, inner, options.liftLevel + 1);
    res.k = chooseRootOrder(*res.polar, refined);
    res.supTheta = std::max(res.polar->maxAbsTheta(), refined.maxAbsTheta());
  } else {
    res.supTheta = res.polar->maxAbsTheta();
    res.k = chooseRootOrder(res.supTheta);
  }

  res.root = std::make_shared<const RootField>(kthRootField(mf, res.polar, res.k));
  for (const auto& c : res.root->report().checks) res.checks.checks.push_back(c);
  auto root = res.root;
  const ComplexField rootFn = [root](std::span<const double> x) { return root->evaluate(x); };

  res.holder = holderCheck(rootFn, res.k, haltonInBall(inner, 2000), options.holderPairs);
  res.checks.add("holder-bound", CheckTag::HolderBound, res.holder.worstRatio, 1.0, res.holder.pass,
                 "|g(y)-g(x)| / (2k C1^(1/k) |y-x|^(1/k))");

  HalfBallOptions hb;
  hb.gridRes = options.gridRes != 0 ? options.gridRes : (n == 2 ? 129 : 33);
  hb.tolSolve = options.tolSolve;
  if (n == 3) hb.maxNodes = 33 * 33 * 33 * 33;
  res.H = std::make_shared<const HalfBallSolution>(
      dirichletHalfBall(rootFn, [](std::span<const double>, double) { return Complex(1.0, 0.0); }, center,
                        res.rho2, hb));
  const double minRe = res.H->minInteriorReal();
  res.checks.add("harmonic-positivity", CheckTag::HarmonicPositivity, minRe, 0.0, minRe > 0.0,
                 "min Re H at interior nodes beyond one cell of the origin");

  res.F = assembleExtension(res.H, res.k, m, res.rho6);
  res.extension = checkExtension(res.F, f, res.holder.C2);
  for (const auto& c : res.extension.checks.checks) res.checks.checks.push_back(c);
  return res;
}

}  // namespace isozero

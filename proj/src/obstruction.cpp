#include "isozero/obstruction.hpp"

#include "isozero/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace isozero {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZeroTol = 1e-12;
// Edge increments are bisected until below this, well under the pi/2
// mismatch threshold.
constexpr double kLiftStep = kPi / 4.0;

Complex evalComplex(const Field& f, std::span<const double> x) {
  const Vec v = f(x);
  const Complex z(v.at(0), v.size() > 1 ? v[1] : 0.0);
  if (std::abs(z) < kZeroTol) throw Error(ErrorKind::ZeroOnSphere, "map vanishes at a sample point");
  return z;
}

Field fieldOf(const PolyMap& map) {
  auto shared = std::make_shared<const PolyMap>(map);
  return [shared](std::span<const double> x) { return shared->evaluate(x); };
}

// Point at parameter s on the path from a to b that interpolates radius and
// direction around c.
Vec pathPoint(std::span<const double> c, std::span<const double> a, std::span<const double> b, double s) {
  const std::size_t n = c.size();
  Vec da(n), db(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    da[i] = a[i] - c[i];
    db[i] = b[i] - c[i];
    v[i] = (1.0 - s) * da[i] + s * db[i];
  }
  const double ra = norm(da), rb = norm(db), rv = norm(v);
  Vec out(n);
  if (rv < 1e-14 * std::max(ra, rb) || ra == 0.0 || rb == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = c[i] + v[i];
    return out;
  }
  const double r = (1.0 - s) * ra + s * rb;
  for (std::size_t i = 0; i < n; ++i) out[i] = c[i] + r * v[i] / rv;
  return out;
}

double liftIncrement(const Field& f, std::span<const double> c, std::span<const double> a,
                     std::span<const double> b, Complex fa, Complex fb, double s0, double s1, double tol,
                     int depth) {
  const double d = std::arg(fb / fa);
  if (std::abs(d) < tol || depth >= 48) return d;
  const double sm = 0.5 * (s0 + s1);
  const Complex fm = evalComplex(f, pathPoint(c, a, b, sm));
  return liftIncrement(f, c, a, b, fa, fm, s0, sm, tol, depth + 1) +
         liftIncrement(f, c, a, b, fm, fb, sm, s1, tol, depth + 1);
}

double pathLift(const Field& f, std::span<const double> c, std::span<const double> a, std::span<const double> b,
                Complex fa, Complex fb, double tol) {
  return liftIncrement(f, c, a, b, fa, fb, 0.0, 1.0, tol, 0);
}

}  // namespace

const char* toString(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::InessentialAlways: return "InessentialAlways";
    case VerdictStatus::InessentialDegreeZero: return "InessentialDegreeZero";
    case VerdictStatus::Essential: return "Essential";
    case VerdictStatus::Unknown: return "Unknown";
  }
  return "Unknown";
}

nlohmann::json InessentialVerdict::toJson() const {
  nlohmann::json j{{"status", toString(status)}, {"rule", rule}, {"citations", citations}};
  j["invariant"] = invariant ? nlohmann::json(*invariant) : nlohmann::json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Winding number and degree

int windingNumber(const Field& f, const BallSpec& circle, double tolAngle) {
  if (circle.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "winding number needs a circle in R^2");
  if (!(tolAngle > 0.0 && tolAngle <= kPi / 2.0))
    throw Error(ErrorKind::InvalidArgument, "tolAngle must lie in (0, pi/2]");
  const std::size_t arcs = 12;
  auto at = [&](double phi) {
    return Vec{circle.center[0] + circle.radius * std::cos(phi), circle.center[1] + circle.radius * std::sin(phi)};
  };
  // Arc subdivision by angle keeps every sample exactly on the circle.
  std::function<double(double, double, Complex, Complex, int)> arc = [&](double a, double b, Complex fa,
                                                                         Complex fb, int depth) -> double {
    const double d = std::arg(fb / fa);
    if (std::abs(d) < tolAngle || depth >= 48) return d;
    const double m = 0.5 * (a + b);
    const Complex fm = evalComplex(f, at(m));
    return arc(a, m, fa, fm, depth + 1) + arc(m, b, fm, fb, depth + 1);
  };
  double total = 0.0;
  Complex prev = evalComplex(f, at(0.0));
  const Complex first = prev;
  for (std::size_t k = 1; k <= arcs; ++k) {
    const double a = 2.0 * kPi * static_cast<double>(k - 1) / arcs;
    const double b = 2.0 * kPi * static_cast<double>(k) / arcs;
    const Complex next = k == arcs ? first : evalComplex(f, at(b));
    total += arc(a, b, prev, next, 0);
    prev = next;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

int windingNumber(const PolyMap& map, const BallSpec& circle, double tolAngle) {
  if (map.n() != 2 || map.q() != 2) throw Error(ErrorKind::DimensionMismatch, "winding number needs n = q = 2");
  return windingNumber(fieldOf(map), circle, tolAngle);
}

DegreeResult brouwerDegree(const Field& f, const SphereMesh& mesh) {
  if (mesh.n == 2) return {windingNumber(f, mesh.ball), 0.0, mesh.refinementLevel};
  if (mesh.n != 3) throw Error(ErrorKind::UnsupportedDimension, "mesh degree needs n in {2, 3}", mesh.n);
  std::vector<Vec> image(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    Vec v = f(mesh.nodes[i]);
    if (v.size() != 3) throw Error(ErrorKind::DimensionMismatch, "degree on S^2 needs q = 3");
    const double r = norm(v);
    if (r < kZeroTol) throw Error(ErrorKind::ZeroOnSphere, "map vanishes at a mesh node", static_cast<long>(i));
    for (double& x : v) x /= r;
    image[i] = std::move(v);
  }
  double total = 0.0;
  bool fine = true;
  for (const auto& cell : mesh.cells) {
    const Vec& a = image[cell[0]];
    const Vec& b = image[cell[1]];
    const Vec& c = image[cell[2]];
    if (distance(a, b) >= 1.0 || distance(b, c) >= 1.0 || distance(c, a) >= 1.0) fine = false;
    total += signedSolidAngle(a, b, c);
  }
  const double raw = total / (4.0 * kPi);
  const double snapped = std::round(raw);
  DegreeResult result{static_cast<int>(snapped), std::abs(raw - snapped), mesh.refinementLevel};
  if (!fine || result.residual >= 0.1)
    throw Error(ErrorKind::MeshTooCoarse, "image triangles too large for the degree sum", mesh.refinementLevel);
  return result;
}

DegreeResult brouwerDegree(const Field& f, const BallSpec& sphere, std::size_t n, int startLevel, int maxLevel) {
  if (sphere.dim() != n) throw Error(ErrorKind::DimensionMismatch, "sphere dimension != n");
  if (n == 1) {
    const Vec plus = f(Vec{sphere.center[0] + sphere.radius});
    const Vec minus = f(Vec{sphere.center[0] - sphere.radius});
    if (std::abs(plus.at(0)) < kZeroTol || std::abs(minus.at(0)) < kZeroTol)
      throw Error(ErrorKind::ZeroOnSphere, "map vanishes on S^0");
    const int sp = plus[0] > 0 ? 1 : -1;
    const int sm = minus[0] > 0 ? 1 : -1;
    return {(sp - sm) / 2, 0.0, 0};
  }
  if (n == 2) return {windingNumber(f, sphere), 0.0, 0};
  if (n != 3) throw Error(ErrorKind::UnsupportedDimension, "degree supported for n in {1, 2, 3}", n);
  for (int level = startLevel; level <= maxLevel; ++level) {
    try {
      return brouwerDegree(f, buildSphereMesh(sphere, 3, level));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MeshTooCoarse || level == maxLevel) throw;
    }
  }
  throw Error(ErrorKind::MeshTooCoarse, "maximum refinement reached", maxLevel);
}

DegreeResult brouwerDegree(const PolyMap& map, const BallSpec& sphere, int startLevel, int maxLevel) {
  if (map.n() != map.q()) throw Error(ErrorKind::DimensionMismatch, "degree needs q = n");
  return brouwerDegree(fieldOf(map), sphere, map.n(), startLevel, maxLevel);
}

// ---------------------------------------------------------------------------
// Classification

InessentialVerdict classifyInessential(const PolyMap& map, const BallSpec& ball, const AnnulusCertificate& cert) {
  if (ball.dim() != map.n()) throw Error(ErrorKind::DimensionMismatch, "ball dimension != map.n");
  const bool covers = cert.valid() && cert.center.size() == ball.dim() &&
                      distance(cert.center, ball.center) <= 1e-12 * std::max(1.0, norm(ball.center)) &&
                      cert.innerRadius <= ball.radius && ball.radius <= cert.outerRadius;
  if (!covers) throw Error(ErrorKind::NoCertificate, "no valid annulus certificate covers the sphere");

  const std::size_t n = map.n(), q = map.q();
  InessentialVerdict v;
  if (n < q) {
    v.status = VerdictStatus::InessentialAlways;
    v.rule = "n < q";
    v.citations = {"pi_{n-1}(S^{q-1}) = 0 for n < q"};
    return v;
  }
  if (q == 2 && n >= 3) {
    v.status = VerdictStatus::InessentialAlways;
    v.rule = "q = 2, n >= 3";
    v.citations = {"pi_{n-1}(S^1) = 0 for n >= 3"};
    return v;
  }
  if (q == n && n <= 3) {
    const int d = brouwerDegree(map, ball).degree;
    v.invariant = d;
    v.status = d == 0 ? VerdictStatus::InessentialDegreeZero : VerdictStatus::Essential;
    v.rule = "q = n: null-homotopic iff degree 0";
    v.citations = {"Hopf degree theorem", "index 0 is equivalent to local inessentiality when q = n"};
    return v;
  }
  if (q == 1) {
    // n >= 2: the sphere is connected, so the certificate forces one sign.
    std::vector<Vec> samples;
    if (n <= 3)
      samples = buildSphereMesh(ball, n, 2).nodes;
    else
      samples = haltonOnSphere(ball, 4096);
    int sign = 0;
    for (const auto& x : samples) {
      const double value = map.evaluate(x)[0];
      const int s = value > 0 ? 1 : (value < 0 ? -1 : 0);
      if (s == 0 || (sign != 0 && s != sign))
        throw Error(ErrorKind::NoCertificate, "sign change on a certified sphere");
      sign = s;
    }
    v.status = VerdictStatus::InessentialAlways;
    v.rule = "q = 1, n >= 2: one-signed on a connected sphere";
    v.citations = {"pi_{n-1}(S^0) = 0 for n >= 2"};
    return v;
  }
  v.status = VerdictStatus::Unknown;
  v.rule = "no decision rule for this (n, q)";
  if (n == 4 && q == 3) {
    v.citations = {"pi_3(S^2) = Z is generated by the Hopf map; an isolated zero whose sphere restriction is the "
                   "Hopf map admits no nearby nonvanishing perturbation, and the Hopf invariant is not computed "
                   "here"};
  } else {
    v.citations = {"pi_{n-1}(S^{q-1}) may be nonzero; invariant not computed"};
  }
  return v;
}

InessentialVerdict classifyInessential(const PolyMap& map, const BallSpec& ball) {
  const auto cert = certifyNonvanishingAdaptive(map, ball.center, ball.radius / 20.0, ball.radius);
  if (!cert.valid()) throw Error(ErrorKind::NoCertificate, "annulus certificate failed");
  return classifyInessential(map, ball, cert);
}

// ---------------------------------------------------------------------------
// Angle lift

double AngleLift::thetaAt(std::span<const double> x) const {
  std::size_t best = 0;
  double bestD = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = distance(nodes[i], x);
    if (d < bestD) {
      bestD = d;
      best = i;
    }
  }
  if (bestD == 0.0) return theta[best];
  const Complex fa = std::polar(std::exp(logModulus[best]), theta[best]);
  const Complex fx = evalComplex(field, x);
  return theta[best] + pathLift(field, ball.center, nodes[best], x, fa, fx, kLiftStep);
}

double AngleLift::maxAbsTheta() const {
  double m = 0.0;
  for (double t : theta) m = std::max(m, std::abs(t));
  return m;
}

namespace {

struct GraphLiftOutcome {
  AngleLift lift;
  double worstMismatch = 0.0;
};

GraphLiftOutcome liftGraph(const Field& f, const BallSpec& ball, std::vector<Vec> nodes,
                           std::vector<std::array<std::size_t, 2>> edges, std::size_t basepoint) {
  if (basepoint >= nodes.size()) throw Error(ErrorKind::InvalidArgument, "basepoint out of range");
  const std::size_t N = nodes.size();
  std::vector<Complex> values(N);
  for (std::size_t i = 0; i < N; ++i) values[i] = evalComplex(f, nodes[i]);

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(N);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e][0]].push_back({edges[e][1], e});
    adj[edges[e][1]].push_back({edges[e][0], e});
  }
  GraphLiftOutcome out;
  AngleLift& L = out.lift;
  L.ball = ball;
  L.field = f;
  L.basepointIndex = basepoint;
  L.theta.assign(N, 0.0);
  L.logModulus.resize(N);
  for (std::size_t i = 0; i < N; ++i) L.logModulus[i] = std::log(std::abs(values[i]));

  std::vector<char> seen(N, 0), treeEdge(edges.size(), 0);
  auto bfs = [&](std::size_t root) {
    seen[root] = 1;
    L.theta[root] = std::arg(values[root]);
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (auto [j, e] : adj[i]) {
        if (seen[j]) continue;
        seen[j] = 1;
        treeEdge[e] = 1;
        L.theta[j] = L.theta[i] + pathLift(f, ball.center, nodes[i], nodes[j], values[i], values[j], kLiftStep);
        queue.push_back(j);
      }
    }
  };
  bfs(basepoint);
  for (std::size_t i = 0; i < N; ++i)
    if (!seen[i]) bfs(i);

  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (treeEdge[e]) continue;
    const auto [a, b] = edges[e];
    const double d = pathLift(f, ball.center, nodes[a], nodes[b], values[a], values[b], kLiftStep);
    const double mismatch = L.theta[a] + d - L.theta[b];
    if (std::abs(mismatch) > std::abs(out.worstMismatch)) out.worstMismatch = mismatch;
  }
  L.nodes = std::move(nodes);
  L.edges = std::move(edges);
  return out;
}

}  // namespace

AngleLift buildAngleLiftOnGraph(const Field& f, const BallSpec& ball, std::vector<Vec> nodes,
                                std::vector<std::array<std::size_t, 2>> edges, std::size_t basepointIndex) {
  auto out = liftGraph(f, ball, std::move(nodes), std::move(edges), basepointIndex);
  if (std::abs(out.worstMismatch) >= kPi / 2.0) {
    const long winding = std::lround(out.worstMismatch / (2.0 * kPi));
    if (winding != 0) throw Error(ErrorKind::CycleObstruction, "argument winds around a graph cycle", winding);
    throw Error(ErrorKind::InconsistentLift, "non-tree edge disagrees with the lift");
  }
  return std::move(out.lift);
}

AngleLift buildAngleLift(const Field& f, const SphereMesh& mesh) {
  auto basepointOf = [](const SphereMesh& m) {
    Vec target = m.ball.center;
    target[0] += m.ball.radius;
    return m.nearestNode(target);
  };
  if (mesh.n == 2) {
    const int w = windingNumber(f, mesh.ball);
    if (w != 0) throw Error(ErrorKind::CycleObstruction, "nonzero winding number", w);
  }
  auto out = liftGraph(f, mesh.ball, mesh.nodes, mesh.edges, basepointOf(mesh));
  if (std::abs(out.worstMismatch) < kPi / 2.0) return std::move(out.lift);
  if (mesh.n == 2)
    throw Error(ErrorKind::CycleObstruction, "nonzero winding number",
                std::lround(out.worstMismatch / (2.0 * kPi)));
  const SphereMesh finer = buildSphereMesh(mesh.ball, mesh.n, mesh.refinementLevel + 1);
  auto retry = liftGraph(f, finer.ball, finer.nodes, finer.edges, basepointOf(finer));
  if (std::abs(retry.worstMismatch) >= kPi / 2.0)
    throw Error(ErrorKind::InconsistentLift, "lift mismatch persists after refinement");
  return std::move(retry.lift);
}

AngleLift buildAngleLift(const PolyMap& map, const SphereMesh& mesh) {
  if (map.q() != 2) throw Error(ErrorKind::DimensionMismatch, "angle lift needs q = 2");
  if (map.n() != mesh.n) throw Error(ErrorKind::DimensionMismatch, "mesh dimension != map.n");
  return buildAngleLift(fieldOf(map), mesh);
}

// ---------------------------------------------------------------------------
// Null-homotopy

SphereNullHomotopy::SphereNullHomotopy(const PolyMap& f, std::optional<AngleLift> lift, BallSpec sphere, Vec c,
                                       double epsilon)
    : f_(std::make_shared<const PolyMap>(f)),
      lift_(std::move(lift)),
      sphere_(std::move(sphere)),
      c_(std::move(c)),
      epsilon_(epsilon) {
  if (lift_) {
    nodeSup_ = 0.0;
    nodeMin_ = std::numeric_limits<double>::infinity();
    for (double lm : lift_->logModulus) {
      nodeSup_ = std::max(nodeSup_, std::exp(lm));
      nodeMin_ = std::min(nodeMin_, std::exp(lm));
    }
  }
}

Vec SphereNullHomotopy::evaluate(std::span<const double> x, double u) const {
  const Vec v = f_->evaluate(x);
  if (f_->q() == 1) {
    const double a = std::abs(v[0]);
    if (a < kZeroTol) throw Error(ErrorKind::ZeroOnSphere, "map vanishes on the sphere");
    const double modulus = std::exp((1.0 - u) * std::log(a) + u * std::log(std::abs(c_[0])));
    return {std::copysign(modulus, c_[0])};
  }
  const Complex z(v[0], v[1]);
  const double r = std::abs(z);
  if (r < kZeroTol) throw Error(ErrorKind::ZeroOnSphere, "map vanishes on the sphere");
  const double theta = lift_->thetaAt(x);
  const Complex w = (1.0 - u) * Complex(std::log(r), theta) + u * std::log(Complex(c_[0], c_[1]));
  const Complex e = std::exp(w);
  return {e.real(), e.imag()};
}

HomotopyFn SphereNullHomotopy::asFunction() const {
  auto self = std::make_shared<const SphereNullHomotopy>(*this);
  return [self](std::span<const double> x, double u) { return self->evaluate(x, u); };
}

SphereNullHomotopy buildNullHomotopy(const PolyMap& f, std::span<const double> p, double delta, double epsilon,
                                     const SphereMesh& mesh) {
  if (p.size() != f.n()) throw Error(ErrorKind::DimensionMismatch, "p dimension != map.n");
  if (!(delta > 0.0) || !(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta and epsilon must be positive");
  const std::size_t n = f.n(), q = f.q();
  if (q == 3 && n == 3)
    throw Error(ErrorKind::NotConstructive, "no constructive null-homotopy for q = n = 3");
  if (!(q == 1 || (q == 2 && n <= 3)))
    throw Error(ErrorKind::NotConstructive, "null-homotopy construction supports q = 1 or q = 2 with n <= 3");
  const BallSpec sphere(Vec(p.begin(), p.end()), delta / 2.0);

  // Sup and min of |f| on the sphere from mesh nodes plus quasi-random points.
  std::vector<Vec> probes;
  if (n == 1) {
    probes = {Vec{p[0] - delta / 2.0}, Vec{p[0] + delta / 2.0}};
  } else {
    if (q == 2 && (mesh.n != n || std::abs(mesh.ball.radius - delta / 2.0) > 1e-12 * delta ||
                   distance(mesh.ball.center, p) > 1e-12))
      throw Error(ErrorKind::InvalidArgument, "mesh must sample S(p, delta/2)");
    probes = haltonOnSphere(sphere, 2000);
    if (mesh.n == n) probes.insert(probes.end(), mesh.nodes.begin(), mesh.nodes.end());
  }
  double sup = 0.0, inf = std::numeric_limits<double>::infinity();
  for (const auto& x : probes) {
    const double r = norm(f.evaluate(x));
    sup = std::max(sup, r);
    inf = std::min(inf, r);
  }
  if (inf < kZeroTol) throw Error(ErrorKind::ZeroOnSphere, "map vanishes on S(p, delta/2)");
  if (sup >= epsilon / 2.0) throw Error(ErrorKind::SupNormTooLarge, "sup |f| on S(p, delta/2) >= epsilon/2");

  if (q == 1) {
    int sign = 0;
    for (const auto& x : probes) {
      const int s = f.evaluate(x)[0] > 0 ? 1 : -1;
      if (sign != 0 && s != sign)
        throw Error(ErrorKind::NotConstructive, "sign change on the sphere: not null-homotopic");
      sign = s;
    }
    SphereNullHomotopy h(f, std::nullopt, sphere, Vec{sign * inf / 2.0}, epsilon);
    return h;
  }

  AngleLift lift;
  if (n == 1) {
    lift = buildAngleLiftOnGraph(fieldOf(f), sphere, probes, {}, 1);
  } else {
    lift = buildAngleLift(fieldOf(f), mesh);
  }
  double minNode = std::numeric_limits<double>::infinity();
  for (double lm : lift.logModulus) minNode = std::min(minNode, std::exp(lm));
  return SphereNullHomotopy(f, std::move(lift), sphere, Vec{minNode / 2.0, 0.0}, epsilon);
}

// ---------------------------------------------------------------------------
// Combinators

HomotopyFn radialReparametrize(const Field& f, const HomotopyFn& phi, std::span<const double> p, double r0,
                               double r) {
  if (!(r0 > 0.0) || !(r > 0.0)) throw Error(ErrorKind::RadiusOutOfDomain, "radii must be positive");
  Vec center(p.begin(), p.end());
  return [f, phi, center, r0, r](std::span<const double> x, double u) -> Vec {
    if (u <= 0.5) return f(radialPoint(center, x, 1.0 + 2.0 * (r0 / r - 1.0) * u));
    return phi(radialPoint(center, x, r0 / r), 2.0 * u - 1.0);
  };
}

HomotopyFn clampScale(const HomotopyFn& phi, double epsilon, double M, double delta2) {
  if (!(M > 0.0)) throw Error(ErrorKind::InvalidArgument, "M must be positive");
  if (M < epsilon || delta2 >= 1.0) return phi;
  if (!(delta2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta2 must lie in (0, 1]");
  const double floorScale = epsilon / (2.0 * M);
  return [phi, floorScale, delta2](std::span<const double> x, double u) -> Vec {
    const double gamma = u <= delta2 ? (floorScale - 1.0) / delta2 * u + 1.0 : floorScale;
    Vec v = phi(x, u);
    for (double& c : v) c *= gamma;
    return v;
  };
}

HomotopyFn coneExtend(const Field& f, const HomotopyFn& psi, std::span<const double> p, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::RadiusOutOfDomain, "radius must be positive");
  Vec center(p.begin(), p.end());
  return [f, psi, center, r](std::span<const double> x, double u) -> Vec {
    const double s = distance(x, center);
    if (s == 0.0) throw Error(ErrorKind::EvaluationAtCenter, "cone extension undefined at the center");
    if (u <= 0.5) return f(radialPoint(center, x, (2.0 * (r - s) * u + s) / s));
    return psi(radialPoint(center, x, r / s), 2.0 * u - 1.0);
  };
}

double sampledMaxNorm(const HomotopyFn& phi, const std::vector<Vec>& points, std::size_t uSteps) {
  if (uSteps < 2) uSteps = 2;
  double m = 0.0;
  for (const auto& x : points)
    for (std::size_t k = 0; k < uSteps; ++k)
      m = std::max(m, norm(phi(x, static_cast<double>(k) / static_cast<double>(uSteps - 1))));
  return m;
}

ConeHomotopyData certificateFromHomotopy(const HomotopyFn& F, std::span<const double> p, double r, double delta,
                                         double epsilon, std::size_t pointSamples, std::size_t timeSamples) {
  if (!(r > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "r and delta must be positive");
  if (timeSamples < 2) timeSamples = 2;
  Vec center(p.begin(), p.end());
  ConeHomotopyData out;
  out.theta = [F, center, delta](std::span<const double> x, double u) {
    return F(radialPoint(center, x, 1.0 - u), delta / 2.0 * u);
  };
  out.endpoint = F(center, delta / 2.0);
  out.minNorm = std::numeric_limits<double>::infinity();
  const auto points = haltonInBall(BallSpec(center, r), pointSamples);
  for (const auto& x : points) {
    if (distance(x, center) == 0.0) continue;
    for (std::size_t k = 0; k < timeSamples; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(timeSamples - 1);
      const double v = norm(out.theta(x, u));
      ++out.samples;
      if (u > 0.0 && v < kZeroTol) throw Error(ErrorKind::ZeroDetected, "family vanishes at a positive time");
      out.minNorm = std::min(out.minNorm, v);
      out.maxNorm = std::max(out.maxNorm, v);
    }
  }
  out.withinEpsilon = out.minNorm > 0.0 && out.maxNorm < epsilon;
  return out;
}

}  // namespace isozero

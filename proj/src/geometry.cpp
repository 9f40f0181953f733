#include "isozero/geometry.hpp"

#include "isozero/error.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

namespace isozero {

BallSpec::BallSpec(Vec c, double r) : center(std::move(c)), radius(r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
}

Vec radialPoint(std::span<const double> p, std::span<const double> x, double scale) {
  Vec out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] + scale * (x[i] - p[i]);
  return out;
}

std::size_t SphereMesh::nearestNode(std::span<const double> x) const {
  std::size_t best = 0;
  double bestD = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) d += (nodes[i][k] - x[k]) * (nodes[i][k] - x[k]);
    if (d < bestD) {
      bestD = d;
      best = i;
    }
  }
  return best;
}

double SphereMesh::maxCellDiameter() const {
  double worst = 0.0;
  for (const auto& cell : cells)
    for (std::size_t a = 0; a < cell.size(); ++a)
      for (std::size_t b = a + 1; b < cell.size(); ++b)
        worst = std::max(worst, distance(nodes[cell[a]], nodes[cell[b]]));
  return worst;
}

namespace {

using P3 = std::array<double, 3>;

P3 normalized(P3 v) {
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / r, v[1] / r, v[2] / r};
}

void collectEdges(SphereMesh& mesh) {
  std::map<std::pair<std::size_t, std::size_t>, bool> seen;
  for (const auto& cell : mesh.cells) {
    for (std::size_t k = 0; k < cell.size(); ++k) {
      std::size_t a = cell[k];
      std::size_t b = cell[(k + 1) % cell.size()];
      if (cell.size() == 2 && k == 1) break;
      if (a > b) std::swap(a, b);
      if (seen.emplace(std::make_pair(a, b), true).second) mesh.edges.push_back({a, b});
    }
  }
}

}  // namespace

SphereMesh buildSphereMesh(const BallSpec& ball, std::size_t n, int level) {
  if (n != 2 && n != 3) throw Error(ErrorKind::UnsupportedDimension, "sphere meshes exist for n = 2, 3 only");
  if (ball.dim() != n) throw Error(ErrorKind::DimensionMismatch, "ball dimension != n");
  if (level < 0) throw Error(ErrorKind::InvalidArgument, "negative refinement level");
  SphereMesh mesh;
  mesh.ball = ball;
  mesh.n = n;
  mesh.refinementLevel = level;
  const auto& c = ball.center;
  const double r = ball.radius;

  if (n == 2) {
    const std::size_t count = 3u << (level + 2);
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      mesh.nodes.push_back({c[0] + r * std::cos(a), c[1] + r * std::sin(a)});
      mesh.cells.push_back({k, (k + 1) % count});
    }
    collectEdges(mesh);
    return mesh;
  }

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<P3> verts = {
      {phi, 0, 1},  {phi, 0, -1},  {-phi, 0, 1}, {-phi, 0, -1}, {0, 1, phi},  {0, 1, -phi},
      {0, -1, phi}, {0, -1, -phi}, {1, phi, 0},  {-1, phi, 0},  {1, -phi, 0}, {-1, -phi, 0}};
  for (auto& v : verts) v = normalized(v);
  // Rotate about the y axis so vertex 0 sits on +x.
  const double ang = std::atan2(verts[0][2], verts[0][0]);
  const double ca = std::cos(ang), sa = std::sin(ang);
  for (auto& v : verts) v = {v[0] * ca + v[2] * sa, v[1], -v[0] * sa + v[2] * ca};
  verts[0] = {1.0, 0.0, 0.0};

  std::vector<std::array<std::size_t, 3>> tris;
  double edgeLen = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < verts.size(); ++i) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d += (verts[0][k] - verts[i][k]) * (verts[0][k] - verts[i][k]);
    edgeLen = std::min(edgeLen, std::sqrt(d));
  }
  auto dist = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d += (verts[a][k] - verts[b][k]) * (verts[a][k] - verts[b][k]);
    return std::sqrt(d);
  };
  for (std::size_t a = 0; a < 12; ++a)
    for (std::size_t b = a + 1; b < 12; ++b)
      for (std::size_t d = b + 1; d < 12; ++d) {
        if (std::abs(dist(a, b) - edgeLen) > 1e-9 || std::abs(dist(b, d) - edgeLen) > 1e-9 ||
            std::abs(dist(a, d) - edgeLen) > 1e-9)
          continue;
        const P3& A = verts[a];
        const P3& B = verts[b];
        const P3& D = verts[d];
        const P3 u{B[0] - A[0], B[1] - A[1], B[2] - A[2]};
        const P3 w{D[0] - A[0], D[1] - A[1], D[2] - A[2]};
        const P3 nrm{u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]};
        const double out = nrm[0] * A[0] + nrm[1] * A[1] + nrm[2] * A[2];
        if (out > 0) tris.push_back({a, b, d});
        else tris.push_back({a, d, b});
      }

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> mid;
    auto midpoint = [&](std::size_t a, std::size_t b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const P3 m = normalized({verts[a][0] + verts[b][0], verts[a][1] + verts[b][1], verts[a][2] + verts[b][2]});
      verts.push_back(m);
      mid.emplace(key, verts.size() - 1);
      return verts.size() - 1;
    };
    std::vector<std::array<std::size_t, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      const std::size_t ab = midpoint(t[0], t[1]);
      const std::size_t bc = midpoint(t[1], t[2]);
      const std::size_t ca2 = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca2});
      next.push_back({ab, t[1], bc});
      next.push_back({ca2, bc, t[2]});
      next.push_back({ab, bc, ca2});
    }
    tris = std::move(next);
  }

  for (const auto& v : verts) mesh.nodes.push_back({c[0] + r * v[0], c[1] + r * v[1], c[2] + r * v[2]});
  for (const auto& t : tris) mesh.cells.push_back({t[0], t[1], t[2]});
  collectEdges(mesh);
  return mesh;
}

double signedSolidAngle(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  const double triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                        a[2] * (b[0] * c[1] - b[1] * c[0]);
  const double ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  const double bc = b[0] * c[0] + b[1] * c[1] + b[2] * c[2];
  const double ca = c[0] * a[0] + c[1] * a[1] + c[2] * a[2];
  return 2.0 * std::atan2(triple, 1.0 + ab + bc + ca);
}

SphereQuadrature quadratureFromMesh(const SphereMesh& mesh) {
  SphereQuadrature q;
  q.ball = mesh.ball;
  q.nodes = mesh.nodes;
  q.weights.assign(mesh.nodes.size(), 0.0);
  const double r = mesh.ball.radius;
  if (mesh.n == 2) {
    for (const auto& cell : mesh.cells) {
      // Arc length of the cell, split between its endpoints.
      const double chord = distance(mesh.nodes[cell[0]], mesh.nodes[cell[1]]);
      const double arc = 2.0 * r * std::asin(std::min(1.0, chord / (2.0 * r)));
      q.weights[cell[0]] += 0.5 * arc;
      q.weights[cell[1]] += 0.5 * arc;
    }
    return q;
  }
  const auto& c = mesh.ball.center;
  for (const auto& cell : mesh.cells) {
    std::array<Vec, 3> u;
    for (int k = 0; k < 3; ++k) {
      u[k].resize(3);
      for (int d = 0; d < 3; ++d) u[k][d] = (mesh.nodes[cell[k]][d] - c[d]) / r;
    }
    const double area = std::abs(signedSolidAngle(u[0], u[1], u[2])) * r * r;
    for (int k = 0; k < 3; ++k) q.weights[cell[k]] += area / 3.0;
  }
  return q;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
void gaussLegendre(std::size_t m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (std::size_t k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(m) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

SphereQuadrature gaussProductQuadrature(const BallSpec& ball, std::size_t polar, std::size_t azimuthal) {
  if (ball.dim() != 3) throw Error(ErrorKind::UnsupportedDimension, "product quadrature is for n = 3");
  std::vector<double> gx, gw;
  gaussLegendre(polar, gx, gw);
  SphereQuadrature q;
  q.ball = ball;
  const double r = ball.radius;
  const auto& c = ball.center;
  for (std::size_t i = 0; i < polar; ++i) {
    const double ct = gx[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (std::size_t j = 0; j < azimuthal; ++j) {
      const double ph = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(azimuthal);
      q.nodes.push_back({c[0] + r * st * std::cos(ph), c[1] + r * st * std::sin(ph), c[2] + r * ct});
      q.weights.push_back(gw[i] * 2.0 * std::numbers::pi / static_cast<double>(azimuthal) * r * r);
    }
  }
  return q;
}

namespace {
constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radicalInverse(std::size_t i, unsigned base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}
}  // namespace

Halton::Halton(std::size_t dim, std::size_t skip) : dim_(dim), index_(skip) {
  if (dim > std::size(kPrimes)) throw Error(ErrorKind::UnsupportedDimension, "Halton dimension too large");
}

Vec Halton::next() {
  Vec p(dim_);
  for (std::size_t d = 0; d < dim_; ++d) p[d] = radicalInverse(index_, kPrimes[d]);
  ++index_;
  return p;
}

std::vector<Vec> haltonInBall(const BallSpec& ball, std::size_t count, std::size_t skip) {
  Halton h(ball.dim(), skip);
  std::vector<Vec> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    Vec u = h.next();
    double r2 = 0.0;
    for (double& v : u) {
      v = 2.0 * v - 1.0;
      r2 += v * v;
    }
    if (r2 > 1.0) continue;
    for (std::size_t d = 0; d < u.size(); ++d) u[d] = ball.center[d] + ball.radius * u[d];
    pts.push_back(std::move(u));
  }
  return pts;
}

std::vector<Vec> haltonOnSphere(const BallSpec& ball, std::size_t count) {
  Halton h(ball.dim(), 1);
  std::vector<Vec> pts;
  pts.reserve(count);
  while (pts.size() < count) {
    Vec u = h.next();
    double r2 = 0.0;
    for (double& v : u) {
      v = 2.0 * v - 1.0;
      r2 += v * v;
    }
    if (r2 > 1.0 || r2 < 1e-4) continue;
    const double s = ball.radius / std::sqrt(r2);
    for (std::size_t d = 0; d < u.size(); ++d) u[d] = ball.center[d] + s * u[d];
    pts.push_back(std::move(u));
  }
  return pts;
}

void parallelFor(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failureMutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace isozero

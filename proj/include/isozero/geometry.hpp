#pragma once

#include "isozero/polynomial.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace isozero {

using Complex = std::complex<double>;

/// Evaluable map R^n -> R^q.
using Field = std::function<Vec(std::span<const double>)>;
/// Evaluable family (x, u) -> R^q; the common contract every homotopy
/// object in this library exposes.
using HomotopyFn = std::function<Vec(std::span<const double>, double)>;

struct BallSpec {
  Vec center;
  double radius = 1.0;

  BallSpec() = default;
  BallSpec(Vec c, double r);
  std::size_t dim() const noexcept { return center.size(); }
};

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline Complex asComplex(std::span<const double> v) { return {v[0], v[1]}; }

/// p + scale * (x - p)
Vec radialPoint(std::span<const double> p, std::span<const double> x, double scale);

/// Sampled S^{n-1}(center, radius) with adjacency. For n = 2 the nodes form
/// a counterclockwise polygon and cells are its edges; for n = 3 cells are
/// triangles ordered counterclockwise seen from outside (outward normal).
struct SphereMesh {
  BallSpec ball;
  std::size_t n = 0;
  std::vector<Vec> nodes;
  std::vector<std::array<std::size_t, 2>> edges;
  std::vector<std::vector<std::size_t>> cells;
  int refinementLevel = 0;

  /// Index of the node nearest to x.
  std::size_t nearestNode(std::span<const double> x) const;
  /// Largest chord length over the cells.
  double maxCellDiameter() const;
};

/// n = 2: regular 3 * 2^(level+2)-gon starting at center + radius * e1.
/// n = 3: icosahedron (one vertex on center + radius * e1) subdivided
/// `level` times with vertices projected to the sphere.
SphereMesh buildSphereMesh(const BallSpec& ball, std::size_t n, int level);

/// Quadrature nodes with weights on S^{n-1}(center, radius); weights sum to
/// the sphere's area.
struct SphereQuadrature {
  BallSpec ball;
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

/// Weights from mesh cell measures (arc length for n = 2, a third of each
/// spherical triangle's area for n = 3).
SphereQuadrature quadratureFromMesh(const SphereMesh& mesh);
/// Gauss-Legendre in cos(polar angle) times uniform azimuth, n = 3 only.
SphereQuadrature gaussProductQuadrature(const BallSpec& ball, std::size_t polar, std::size_t azimuthal);

/// Signed solid angle of the spherical triangle with unit vertices a, b, c.
double signedSolidAngle(std::span<const double> a, std::span<const double> b, std::span<const double> c);

/// Deterministic low-discrepancy points in [0, 1)^dim (first primes as bases).
class Halton {
 public:
  explicit Halton(std::size_t dim, std::size_t skip = 1);
  Vec next();

 private:
  std::size_t dim_;
  std::size_t index_;
};

/// The next `count` Halton points mapped into the ball by rejection from its
/// bounding cube.
std::vector<Vec> haltonInBall(const BallSpec& ball, std::size_t count, std::size_t skip = 1);
/// Approximately uniform directions on S^{d-1} (Halton + normalization).
std::vector<Vec> haltonOnSphere(const BallSpec& ball, std::size_t count);

/// Runs body(i) for i in [0, count) across hardware threads. Bodies must
/// write only to their own slots.
void parallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace isozero

#include "isozero/certification.hpp"

#include "isozero/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace isozero {

nlohmann::json AnnulusCertificate::toJson() const {
  return {{"map", mapId},
          {"method", method},
          {"valid", valid()},
          {"center", center},
          {"innerRadius", innerRadius},
          {"outerRadius", outerRadius},
          {"mu", minSampled},
          {"L", lipschitz},
          {"h", gridStep},
          {"bound", certifiedLowerBound},
          {"samples", samples},
          {"worstPoint", worstPoint}};
}

namespace {

void checkArguments(const PolyMap& map, std::span<const double> center, double r0, double R) {
  if (center.size() != map.n()) throw Error(ErrorKind::DimensionMismatch, "center dimension != map.n");
  if (!(r0 >= 0.0) || !(R > 0.0)) throw Error(ErrorKind::InvalidArgument, "radii must be non-negative");
  if (r0 >= R) throw Error(ErrorKind::InvalidArgument, "inner radius must be below outer radius");
}

// Visits every point center + h*k of the integer grid whose distance to the
// center lies in [lo, hi].
template <class Visit>
void forEachGridPoint(std::span<const double> center, double h, double lo, double hi, Visit&& visit) {
  const std::size_t n = center.size();
  const long K = static_cast<long>(std::ceil(hi / h));
  std::vector<long> k(n, -K);
  Vec x(n);
  const double lo2 = lo * lo, hi2 = hi * hi;
  while (true) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = h * static_cast<double>(k[i]);
      x[i] = center[i] + d;
      r2 += d * d;
    }
    if (r2 >= lo2 && r2 <= hi2) visit(std::span<const double>(x));
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (k[i] < K) {
        ++k[i];
        break;
      }
      k[i] = -K;
    }
    if (i == n) break;
  }
}

}  // namespace

AnnulusCertificate certifyNonvanishingAnnulus(const PolyMap& map, std::span<const double> center, double r0,
                                              double R, double h, const std::string& mapId) {
  checkArguments(map, center, r0, R);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  const std::size_t n = map.n();
  const double reach = h * std::sqrt(static_cast<double>(n)) / 2.0;
  const double perAxis = 2.0 * std::ceil((R + reach) / h) + 1.0;
  if (std::pow(perAxis, static_cast<double>(n)) > 2e9)
    throw Error(ErrorKind::InvalidArgument, "uniform grid too large; use the adaptive certifier");

  AnnulusCertificate cert;
  cert.mapId = mapId;
  cert.center.assign(center.begin(), center.end());
  cert.innerRadius = r0;
  cert.outerRadius = R;
  cert.gridStep = h;
  cert.method = "uniform";
  cert.lipschitz = lipschitzBound(map, center, R + reach);

  double mu = std::numeric_limits<double>::infinity();
  Vec value(map.q());
  forEachGridPoint(center, h, std::max(0.0, r0 - reach), R + reach, [&](std::span<const double> x) {
    map.evaluateInto(x, value);
    const double v = norm(value);
    ++cert.samples;
    if (v < mu) {
      mu = v;
      cert.worstPoint.assign(x.begin(), x.end());
    }
  });
  cert.minSampled = mu;
  cert.certifiedLowerBound = mu - cert.lipschitz * reach;
  return cert;
}

double recomputeGridMinimum(const PolyMap& map, const AnnulusCertificate& cert) {
  const double reach = cert.gridStep * std::sqrt(static_cast<double>(map.n())) / 2.0;
  double mu = std::numeric_limits<double>::infinity();
  Vec value(map.q());
  forEachGridPoint(cert.center, cert.gridStep, std::max(0.0, cert.innerRadius - reach), cert.outerRadius + reach,
                   [&](std::span<const double> x) {
                     map.evaluateInto(x, value);
                     mu = std::min(mu, norm(value));
                   });
  return mu;
}

AnnulusCertificate certifyNonvanishingAdaptive(const PolyMap& map, std::span<const double> center, double r0,
                                               double R, const AdaptiveOptions& options,
                                               const std::string& mapId) {
  checkArguments(map, center, r0, R);
  const std::size_t n = map.n();
  const std::size_t q = map.q();
  const double sqrtN = std::sqrt(static_cast<double>(n));

  AnnulusCertificate cert;
  cert.mapId = mapId;
  cert.center.assign(center.begin(), center.end());
  cert.innerRadius = r0;
  cert.outerRadius = R;
  cert.method = "adaptive";
  cert.minSampled = std::numeric_limits<double>::infinity();
  cert.certifiedLowerBound = std::numeric_limits<double>::infinity();

  const long perAxis = std::max(1L, static_cast<long>(std::ceil(2.0 * R / options.initialStep)));
  const double side0 = 2.0 * R / static_cast<double>(perAxis);
  cert.gridStep = side0;

  struct Cell {
    Vec c;
    double side;
  };
  std::vector<Cell> stack;
  {
    std::vector<long> k(n, 0);
    while (true) {
      Vec c(n);
      for (std::size_t i = 0; i < n; ++i) c[i] = center[i] - R + side0 * (static_cast<double>(k[i]) + 0.5);
      stack.push_back({std::move(c), side0});
      std::size_t i = 0;
      for (; i < n; ++i) {
        if (k[i] + 1 < perAxis) {
          ++k[i];
          break;
        }
        k[i] = 0;
      }
      if (i == n) break;
    }
  }

  Vec value(q);
  bool failed = false;
  while (!stack.empty()) {
    Cell cell = std::move(stack.back());
    stack.pop_back();
    const double rho = cell.side * sqrtN / 2.0;
    const double d = distance(cell.c, center);
    if (d - rho > R || d + rho < r0) continue;
    if (++cert.samples > options.maxCells) {
      failed = true;
      cert.certifiedLowerBound = -1.0;
      cert.worstPoint = cell.c;
      break;
    }
    double roundSq = 0.0;
    double lipSq = 0.0;
    double bestComponent = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q; ++i) {
      const auto lb = map.compiled(i).localBound(cell.c, rho);
      value[i] = lb.value;
      lipSq += lb.lipschitz * lb.lipschitz;
      roundSq += lb.roundoff * lb.roundoff;
      bestComponent = std::max(bestComponent, std::abs(lb.value) - lb.lipschitz * rho - lb.roundoff);
    }
    const double v = norm(value);
    const double lower = std::max(v - std::sqrt(lipSq) * rho - std::sqrt(roundSq), bestComponent);
    if (lower > 0.0) {
      if (v < cert.minSampled) cert.minSampled = v;
      if (lower < cert.certifiedLowerBound) {
        cert.certifiedLowerBound = lower;
        cert.worstPoint = cell.c;
      }
      cert.lipschitz = std::max(cert.lipschitz, std::sqrt(lipSq));
      cert.gridStep = std::min(cert.gridStep, cell.side);
      continue;
    }
    const double half = cell.side / 2.0;
    if (half < options.minStep) {
      failed = true;
      cert.minSampled = std::min(cert.minSampled, v);
      cert.certifiedLowerBound = lower;
      cert.worstPoint = cell.c;
      cert.gridStep = half;
      break;
    }
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Vec c = cell.c;
      for (std::size_t i = 0; i < n; ++i) c[i] += ((mask >> i) & 1 ? 0.5 : -0.5) * half;
      stack.push_back({std::move(c), half});
    }
  }
  if (!failed && cert.samples == 0) cert.certifiedLowerBound = -1.0;
  return cert;
}

// ---------------------------------------------------------------------------

std::optional<ZeroWitness> findZeroMultistart(const PolyMap& map, const SearchRegion& region,
                                              std::size_t numStarts, double tol) {
  if (numStarts < 1) throw Error(ErrorKind::InvalidArgument, "numStarts must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  if (region.ball.dim() != map.n()) throw Error(ErrorKind::DimensionMismatch, "ball dimension != map.n");
  const std::size_t n = map.n();
  const std::size_t q = map.q();
  const auto starts = haltonInBall(region.ball, numStarts);

  Eigen::VectorXd x(n), fx(q), trial(n), ftrial(q);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> J(q, n);
  auto eval = [&](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    map.evaluateInto(std::span<const double>(p.data(), n), std::span<double>(out.data(), q));
  };

  for (std::size_t s = 0; s < starts.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) x[i] = starts[s][i];
    eval(x, fx);
    double f2 = fx.squaredNorm();
    int it = 0;
    for (; it < 100 && std::sqrt(f2) >= tol; ++it) {
      map.jacobianInto(std::span<const double>(x.data(), n), std::span<double>(J.data(), q * n));
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
      const Eigen::VectorXd step = -cod.solve(fx);
      if (!step.allFinite()) break;
      double lambda = 1.0;
      bool accepted = false;
      while (lambda > 1e-10) {
        trial = x + lambda * step;
        eval(trial, ftrial);
        const double t2 = ftrial.squaredNorm();
        if (t2 <= (1.0 - 1e-4 * lambda) * f2) {
          x = trial;
          fx = ftrial;
          f2 = t2;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    const double residual = std::sqrt(f2);
    if (residual >= tol) continue;
    const double r = distance(std::span<const double>(x.data(), n), region.ball.center);
    if (r > region.ball.radius || r < region.innerRadius) continue;
    ZeroWitness w;
    w.point.assign(x.data(), x.data() + n);
    w.residual = residual;
    w.iterations = it;
    w.startIndex = s;
    return w;
  }
  return std::nullopt;
}

std::optional<ZeroWitness> findZeroMultistart(const PolyMap& map, const BallSpec& ball, std::size_t numStarts,
                                              double tol) {
  return findZeroMultistart(map, SearchRegion{ball, 0.0}, numStarts, tol);
}

}  // namespace isozero

#include "isozero/export.hpp"

#include "isozero/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace isozero {

std::size_t SliceGrid::numNodes() const {
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim(); ++k) total *= res;
  return total;
}

Vec SliceGrid::node(std::size_t index) const {
  Vec x(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    x[k] = lower[k] + static_cast<double>(index % res) * step(k);
    index /= res;
  }
  return x;
}

namespace {

// Kuhn decomposition: each tetrahedron walks from corner 0 to corner 7 by
// adding one axis bit at a time in the order of a permutation.
constexpr std::array<std::array<int, 4>, 6> kTets = {{
    {0, 1, 3, 7},
    {0, 1, 5, 7},
    {0, 2, 3, 7},
    {0, 2, 6, 7},
    {0, 4, 5, 7},
    {0, 4, 6, 7},
}};

void checkGrid(const SliceGrid& grid) {
  if (grid.lower.size() != grid.upper.size()) throw Error(ErrorKind::DimensionMismatch, "grid bounds");
  if (grid.res < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 nodes per axis");
  for (std::size_t k = 0; k < grid.dim(); ++k)
    if (!(grid.upper[k] > grid.lower[k])) throw Error(ErrorKind::InvalidArgument, "empty grid box");
}

}  // namespace

TriangleMesh extractLevelSet(const std::vector<double>& values, const SliceGrid& grid) {
  checkGrid(grid);
  if (grid.dim() != 3) throw Error(ErrorKind::UnsupportedDimension, "level sets need a 3-D grid");
  if (values.size() != grid.numNodes()) throw Error(ErrorKind::DimensionMismatch, "one value per grid node");
  const std::size_t N = grid.res;
  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::size_t> edgeVertex;

  auto vertexOn = [&](std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    const std::uint64_t key = static_cast<std::uint64_t>(a) * values.size() + b;
    auto [it, inserted] = edgeVertex.try_emplace(key, mesh.vertices.size());
    if (inserted) {
      const double s = values[a] / (values[a] - values[b]);
      const Vec xa = grid.node(a), xb = grid.node(b);
      mesh.vertices.push_back({xa[0] + s * (xb[0] - xa[0]), xa[1] + s * (xb[1] - xa[1]), xa[2] + s * (xb[2] - xa[2])});
    }
    return it->second;
  };
  auto emit = [&](std::size_t a, std::size_t b, std::size_t c) {
    if (a != b && b != c && a != c) mesh.faces.push_back({a, b, c});
  };

  for (std::size_t k = 0; k + 1 < N; ++k)
    for (std::size_t j = 0; j + 1 < N; ++j)
      for (std::size_t i = 0; i + 1 < N; ++i) {
        std::array<std::size_t, 8> corner{};
        for (int c = 0; c < 8; ++c)
          corner[c] = (i + (c & 1)) + N * ((j + ((c >> 1) & 1)) + N * (k + ((c >> 2) & 1)));
        for (const auto& tet : kTets) {
          std::array<std::size_t, 4> in{}, out{};
          std::size_t nIn = 0, nOut = 0;
          for (int c : tet) {
            if (values[corner[c]] < 0.0)
              in[nIn++] = corner[c];
            else
              out[nOut++] = corner[c];
          }
          if (nIn == 0 || nOut == 0) continue;
          if (nIn == 1 || nOut == 1) {
            const bool single = nIn == 1;
            const std::size_t apex = single ? in[0] : out[0];
            const auto& others = single ? out : in;
            emit(vertexOn(apex, others[0]), vertexOn(apex, others[1]), vertexOn(apex, others[2]));
          } else {
            const std::size_t v0 = vertexOn(in[0], out[0]), v1 = vertexOn(in[0], out[1]);
            const std::size_t v2 = vertexOn(in[1], out[1]), v3 = vertexOn(in[1], out[0]);
            emit(v0, v1, v2);
            emit(v0, v2, v3);
          }
        }
      }
  return mesh;
}

std::size_t connectedComponents(const TriangleMesh& mesh) {
  std::vector<std::size_t> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& f : mesh.faces) {
    parent[find(f[1])] = find(f[0]);
    parent[find(f[2])] = find(f[0]);
  }
  std::vector<bool> used(mesh.vertices.size(), false);
  for (const auto& f : mesh.faces)
    for (std::size_t v : f) used[v] = true;
  std::size_t count = 0;
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (used[v] && find(v) == v) ++count;
  return count;
}

void writeObj(const TriangleMesh& mesh, const std::filesystem::path& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << "# " << header << "\n# vertices " << mesh.vertices.size() << " faces " << mesh.faces.size() << "\n";
  out << std::setprecision(10);
  for (const auto& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

std::vector<std::filesystem::path> exportSlices(const HomotopyFn& F, const std::vector<double>& times,
                                                const SliceGrid& grid, const std::filesystem::path& dir,
                                                const std::string& stem, const ExportOptions& options) {
  checkGrid(grid);
  const std::size_t n = grid.dim();
  if (options.obj && n != 3) throw Error(ErrorKind::UnsupportedDimension, "OBJ export needs n = 3");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const std::size_t total = grid.numNodes();

  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    std::vector<Vec> vals(total);
    parallelFor(total, [&](std::size_t i) { vals[i] = F(grid.node(i), t); });

    if (options.csv) {
      const auto path = dir / (stem + "_t" + std::to_string(ti) + ".csv");
      std::ofstream out(path);
      if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
      out << std::setprecision(12);
      out << "# t=" << t << '\n';
      for (std::size_t k = 0; k < n; ++k) out << 'x' << k + 1 << ',';
      out << "normF\n";
      for (std::size_t i = 0; i < total; ++i) {
        const Vec x = grid.node(i);
        for (double c : x) out << c << ',';
        out << norm(vals[i]) << '\n';
      }
      written.push_back(path);
    }
    if (options.obj) {
      const std::size_t q = vals.empty() ? 0 : vals[0].size();
      for (std::size_t j = 0; j < q; ++j) {
        std::vector<double> comp(total);
        for (std::size_t i = 0; i < total; ++i) comp[i] = vals[i][j];
        const TriangleMesh mesh = extractLevelSet(comp, grid);
        const auto path = dir / (stem + "_t" + std::to_string(ti) + "_F" + std::to_string(j + 1) + ".obj");
        std::ostringstream header;
        header << std::setprecision(12) << "zero set of F" << j + 1 << " at t=" << t;
        writeObj(mesh, path, header.str());
        written.push_back(path);
      }
    }
  }
  return written;
}

}  // namespace isozero

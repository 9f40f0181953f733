#pragma once

#include "isozero/geometry.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace isozero {

/// Axis-aligned box sampled with `res` nodes per axis.
struct SliceGrid {
  Vec lower;
  Vec upper;
  std::size_t res = 33;

  std::size_t dim() const noexcept { return lower.size(); }
  double step(std::size_t axis) const { return (upper[axis] - lower[axis]) / static_cast<double>(res - 1); }
  std::size_t numNodes() const;
  Vec node(std::size_t index) const;
};

struct TriangleMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<std::size_t, 3>> faces;
};

/// Zero set of one scalar sampled on a 3-D grid, by marching tetrahedra
/// (six tetrahedra per cube sharing the main diagonal). Vertices lie on
/// sign-changing grid edges (a value of exactly 0 counts as positive) and are
/// numbered in order of first use while cubes are visited in index order.
TriangleMesh extractLevelSet(const std::vector<double>& values, const SliceGrid& grid);

/// Number of connected components of the face graph (faces sharing a vertex).
std::size_t connectedComponents(const TriangleMesh& mesh);

void writeObj(const TriangleMesh& mesh, const std::filesystem::path& path, const std::string& header);

struct ExportOptions {
  bool csv = true;
  bool obj = true;
};

/// Writes, per time t, `<stem>_t<i>.csv` with columns x_1..x_n, |F| and,
/// for n = 3, `<stem>_t<i>_F<j>.obj` with the zero set of each component.
/// Returns the written paths in order. UnsupportedDimension when obj is
/// requested for n != 3.
std::vector<std::filesystem::path> exportSlices(const HomotopyFn& F, const std::vector<double>& times,
                                                const SliceGrid& grid, const std::filesystem::path& dir,
                                                const std::string& stem, const ExportOptions& options = {});

}  // namespace isozero

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace stm {

/// Space-time point. The first `d` entries are spatial coordinates and entry
/// `d` is time; unused trailing entries are zero.
using Point = std::array<double, 3>;

/// Boundary node sets of a space-time mesh.
struct BoundaryTags {
  std::vector<std::size_t> gamma0;  // t = 0
  std::vector<std::size_t> gamma1;  // t = 1
  std::vector<std::size_t> lateral; // spatial boundary of the unit cube
};

/// Structured simplicial triangulation of [0,1]^{d+1}, time last.
///
/// Cells are ordered cube by cube (x fastest, then y, then t), with a fixed
/// number of simplices per cube, so a point can be located in O(1).
struct SimplexMesh {
  int d = 1;       // spatial dimension
  int dim = 2;     // space-time dimension, d + 1
  int n_space = 1; // cubes per spatial axis
  int n_time = 1;  // cubes along time
  bool periodic = false;

  std::vector<Point> vertices;
  std::vector<std::array<std::size_t, 4>> cells; // first dim+1 entries used

  std::vector<std::size_t> gamma0_nodes;
  std::vector<std::size_t> gamma1_nodes;
  std::vector<std::size_t> lateral_nodes;

  /// Facets lying on t = 0 and t = 1 (first `dim` entries used).
  std::vector<std::array<std::size_t, 3>> gamma0_facets;
  std::vector<std::array<std::size_t, 3>> gamma1_facets;

  /// slave node -> master node, one spatial coordinate apart by exactly 1.
  /// Chains are possible in d = 2 (corner -> edge -> interior master).
  std::vector<std::optional<std::size_t>> periodic_map;

  /// node -> global dof; periodic slaves share their master's dof.
  std::vector<std::size_t> dof_map;
  std::size_t n_dofs = 0;

  /// Representative node for each dof (the master node).
  std::vector<std::size_t> dof_node;

  [[nodiscard]] std::size_t n_vertices() const { return vertices.size(); }
  [[nodiscard]] std::size_t n_cells() const { return cells.size(); }
  [[nodiscard]] int vertices_per_cell() const { return dim + 1; }
  [[nodiscard]] int cells_per_cube() const { return d == 1 ? 2 : 6; }

  /// Space-time lattice index of a vertex, (i, [j,] k).
  [[nodiscard]] std::size_t node_index(int i, int j, int k) const;

  /// Signed volume of cell `c` (positive for every cell of a built mesh).
  [[nodiscard]] double cell_volume(std::size_t c) const;

  /// Cell containing `p`, or nullopt outside the unit cube.
  [[nodiscard]] std::optional<std::size_t> locate(const Point& p) const;

  /// Barycentric coordinates of `p` in cell `c`.
  [[nodiscard]] std::array<double, 4> barycentric(std::size_t c,
                                                  const Point& p) const;

  /// Mesh spacing in space and time.
  [[nodiscard]] double h_space() const { return 1.0 / n_space; }
  [[nodiscard]] double h_time() const { return 1.0 / n_time; }
};

/// Builds the structured mesh. For d = 1 each grid square is split by the
/// (0,0)-(1,1) diagonal; for d = 2 each cube is split into the 6 Kuhn
/// tetrahedra around its main diagonal. Throws std::invalid_argument for
/// d outside {1, 2} or non-positive subdivisions.
SimplexMesh build_space_time_mesh(int d, int n_space, int n_time,
                                  bool periodic);

/// Recomputes boundary tags from vertex coordinates (tolerance 1e-12).
BoundaryTags classify_boundary(const SimplexMesh& mesh);

/// Dofs (deduplicated, sorted) of the given node set.
std::vector<std::size_t> nodes_to_dofs(const SimplexMesh& mesh,
                                       const std::vector<std::size_t>& nodes);

} // namespace stm

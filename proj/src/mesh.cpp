#include "stmeta/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stm {

namespace {

constexpr double kTagTol = 1e-12;

double det2(double a, double b, double c, double d) { return a * d - b * c; }

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

} // namespace

std::size_t SimplexMesh::node_index(int i, int j, int k) const {
  const auto np = static_cast<std::size_t>(n_space + 1);
  if (d == 1) return static_cast<std::size_t>(k) * np + static_cast<std::size_t>(i);
  return (static_cast<std::size_t>(k) * np + static_cast<std::size_t>(j)) * np +
         static_cast<std::size_t>(i);
}

double SimplexMesh::cell_volume(std::size_t c) const {
  const auto& cell = cells[c];
  const Point& x0 = vertices[cell[0]];
  if (dim == 2) {
    const Point& x1 = vertices[cell[1]];
    const Point& x2 = vertices[cell[2]];
    return 0.5 * det2(x1[0] - x0[0], x2[0] - x0[0], x1[1] - x0[1], x2[1] - x0[1]);
  }
  std::array<std::array<double, 3>, 3> m{};
  for (int col = 0; col < 3; ++col) {
    const Point& xc = vertices[cell[col + 1]];
    for (int row = 0; row < 3; ++row) m[row][col] = xc[row] - x0[row];
  }
  return det3(m) / 6.0;
}

std::array<double, 4> SimplexMesh::barycentric(std::size_t c, const Point& p) const {
  const auto& cell = cells[c];
  const Point& x0 = vertices[cell[0]];
  std::array<double, 4> lambda{};
  if (dim == 2) {
    const Point& x1 = vertices[cell[1]];
    const Point& x2 = vertices[cell[2]];
    const double a = x1[0] - x0[0], b = x2[0] - x0[0];
    const double cc = x1[1] - x0[1], dd = x2[1] - x0[1];
    const double det = det2(a, b, cc, dd);
    const double rx = p[0] - x0[0], ry = p[1] - x0[1];
    lambda[1] = det2(rx, b, ry, dd) / det;
    lambda[2] = det2(a, rx, cc, ry) / det;
    lambda[0] = 1.0 - lambda[1] - lambda[2];
    return lambda;
  }
  std::array<std::array<double, 3>, 3> m{};
  for (int col = 0; col < 3; ++col) {
    const Point& xc = vertices[cell[col + 1]];
    for (int row = 0; row < 3; ++row) m[row][col] = xc[row] - x0[row];
  }
  const double det = det3(m);
  double sum = 0.0;
  for (int col = 0; col < 3; ++col) {
    auto mc = m;
    for (int row = 0; row < 3; ++row) mc[row][col] = p[row] - x0[row];
    lambda[col + 1] = det3(mc) / det;
    sum += lambda[col + 1];
  }
  lambda[0] = 1.0 - sum;
  return lambda;
}

std::optional<std::size_t> SimplexMesh::locate(const Point& p) const {
  for (int a = 0; a < dim; ++a) {
    if (p[a] < -kTagTol || p[a] > 1.0 + kTagTol) return std::nullopt;
  }
  auto cube_index = [](double x, int n) {
    int i = static_cast<int>(std::floor(x * n));
    return std::clamp(i, 0, n - 1);
  };
  const int i = cube_index(p[0], n_space);
  std::size_t cube = 0;
  if (d == 1) {
    const int k = cube_index(p[1], n_time);
    cube = static_cast<std::size_t>(k) * n_space + i;
  } else {
    const int j = cube_index(p[1], n_space);
    const int k = cube_index(p[2], n_time);
    cube = (static_cast<std::size_t>(k) * n_space + j) * n_space + i;
  }
  const auto per = static_cast<std::size_t>(cells_per_cube());
  std::size_t best = cube * per;
  double best_min = -1e300;
  for (std::size_t c = cube * per; c < (cube + 1) * per; ++c) {
    const auto lambda = barycentric(c, p);
    double lo = lambda[0];
    for (int a = 1; a <= dim; ++a) lo = std::min(lo, lambda[a]);
    if (lo > best_min) {
      best_min = lo;
      best = c;
    }
  }
  return best;
}

SimplexMesh build_space_time_mesh(int d, int n_space, int n_time, bool periodic) {
  if (d != 1 && d != 2) {
    throw std::invalid_argument("build_space_time_mesh: spatial dimension must be 1 or 2, got " +
                                std::to_string(d));
  }
  if (n_space < 1 || n_time < 1) {
    throw std::invalid_argument("build_space_time_mesh: subdivisions must be positive");
  }

  SimplexMesh mesh;
  mesh.d = d;
  mesh.dim = d + 1;
  mesh.n_space = n_space;
  mesh.n_time = n_time;
  mesh.periodic = periodic;

  const int np = n_space + 1;
  const int nt = n_time + 1;
  const double hs = 1.0 / n_space;
  const double ht = 1.0 / n_time;

  if (d == 1) {
    mesh.vertices.reserve(static_cast<std::size_t>(np) * nt);
    for (int k = 0; k < nt; ++k)
      for (int i = 0; i < np; ++i)
        mesh.vertices.push_back({i == n_space ? 1.0 : i * hs, k == n_time ? 1.0 : k * ht, 0.0});

    mesh.cells.reserve(2 * static_cast<std::size_t>(n_space) * n_time);
    for (int k = 0; k < n_time; ++k) {
      for (int i = 0; i < n_space; ++i) {
        const auto v00 = mesh.node_index(i, 0, k);
        const auto v10 = mesh.node_index(i + 1, 0, k);
        const auto v01 = mesh.node_index(i, 0, k + 1);
        const auto v11 = mesh.node_index(i + 1, 0, k + 1);
        mesh.cells.push_back({v00, v10, v11, 0});
        mesh.cells.push_back({v00, v11, v01, 0});
      }
    }
  } else {
    mesh.vertices.reserve(static_cast<std::size_t>(np) * np * nt);
    for (int k = 0; k < nt; ++k)
      for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i)
          mesh.vertices.push_back({i == n_space ? 1.0 : i * hs, j == n_space ? 1.0 : j * hs,
                                   k == n_time ? 1.0 : k * ht});

    // Kuhn subdivision: one tetrahedron per axis permutation.
    constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    mesh.cells.reserve(6 * static_cast<std::size_t>(n_space) * n_space * n_time);
    for (int k = 0; k < n_time; ++k) {
      for (int j = 0; j < n_space; ++j) {
        for (int i = 0; i < n_space; ++i) {
          for (const auto& perm : perms) {
            std::array<int, 3> corner{i, j, k};
            std::array<std::size_t, 4> tet{};
            tet[0] = mesh.node_index(corner[0], corner[1], corner[2]);
            for (int s = 0; s < 3; ++s) {
              ++corner[perm[s]];
              tet[s + 1] = mesh.node_index(corner[0], corner[1], corner[2]);
            }
            mesh.cells.push_back(tet);
            if (mesh.cell_volume(mesh.cells.size() - 1) < 0.0) {
              std::swap(mesh.cells.back()[2], mesh.cells.back()[3]);
            }
          }
        }
      }
    }
  }

  const auto tags = classify_boundary(mesh);
  mesh.gamma0_nodes = tags.gamma0;
  mesh.gamma1_nodes = tags.gamma1;
  mesh.lateral_nodes = tags.lateral;

  // Facets on t = 0 / t = 1.
  const int nv = mesh.dim + 1;
  for (const auto& cell : mesh.cells) {
    for (int omit = 0; omit < nv; ++omit) {
      std::array<std::size_t, 3> facet{};
      int n = 0;
      bool at0 = true;
      bool at1 = true;
      for (int a = 0; a < nv; ++a) {
        if (a == omit) continue;
        const double t = mesh.vertices[cell[a]][d];
        at0 = at0 && t < kTagTol;
        at1 = at1 && t > 1.0 - kTagTol;
        facet[n++] = cell[a];
      }
      if (at0) mesh.gamma0_facets.push_back(facet);
      if (at1) mesh.gamma1_facets.push_back(facet);
    }
  }

  // Periodic identification and dof numbering.
  const std::size_t nvert = mesh.vertices.size();
  mesh.periodic_map.assign(nvert, std::nullopt);
  if (periodic) {
    for (int k = 0; k < nt; ++k) {
      for (int j = 0; j < (d == 2 ? np : 1); ++j) {
        for (int i = 0; i < np; ++i) {
          const auto node = mesh.node_index(i, j, k);
          if (i == n_space) {
            mesh.periodic_map[node] = mesh.node_index(0, j, k);
          } else if (d == 2 && j == n_space) {
            mesh.periodic_map[node] = mesh.node_index(i, 0, k);
          }
        }
      }
    }
  }
  mesh.dof_map.assign(nvert, 0);
  mesh.dof_node.clear();
  for (std::size_t n = 0; n < nvert; ++n) {
    if (const auto& master = mesh.periodic_map[n]) {
      mesh.dof_map[n] = mesh.dof_map[*master];
    } else {
      mesh.dof_map[n] = mesh.dof_node.size();
      mesh.dof_node.push_back(n);
    }
  }
  mesh.n_dofs = mesh.dof_node.size();
  return mesh;
}

BoundaryTags classify_boundary(const SimplexMesh& mesh) {
  BoundaryTags tags;
  const int d = mesh.d;
  for (std::size_t n = 0; n < mesh.vertices.size(); ++n) {
    const Point& p = mesh.vertices[n];
    if (p[d] < kTagTol) tags.gamma0.push_back(n);
    if (p[d] > 1.0 - kTagTol) tags.gamma1.push_back(n);
    bool lateral = false;
    for (int a = 0; a < d; ++a) {
      lateral = lateral || p[a] < kTagTol || p[a] > 1.0 - kTagTol;
    }
    if (lateral) tags.lateral.push_back(n);
  }
  return tags;
}

std::vector<std::size_t> nodes_to_dofs(const SimplexMesh& mesh,
                                       const std::vector<std::size_t>& nodes) {
  std::vector<std::size_t> dofs;
  dofs.reserve(nodes.size());
  for (auto n : nodes) dofs.push_back(mesh.dof_map[n]);
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  return dofs;
}

} // namespace stm

#include "stmeta/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stm {

namespace {

// Dof of local vertex a of cell c.
inline std::size_t cell_dof(const SimplexMesh& mesh, std::size_t c, int a) {
  return mesh.dof_map[mesh.cells[c][static_cast<std::size_t>(a)]];
}

// u_k at a barycentric point of a cell.
inline double velocity_at(const SimplexMesh& mesh, const SpaceTimeVelocity& u, std::size_t c,
                          int k, const std::array<double, 4>& lambda) {
  const auto comp = u.u.component(k);
  double v = 0.0;
  for (int a = 0; a <= mesh.dim; ++a) v += lambda[a] * comp[cell_dof(mesh, c, a)];
  return v;
}

// b . grad lambda_a for each local vertex, b = (u(point), 1).
inline std::array<double, 4> transport_gradients(const SimplexMesh& mesh, const CellGeometry& geo,
                                                 const std::array<double, 3>& b) {
  std::array<double, 4> bg{};
  for (int a = 0; a <= mesh.dim; ++a) {
    double s = 0.0;
    for (int k = 0; k < mesh.dim; ++k) s += b[k] * geo.grad[a][k];
    bg[a] = s;
  }
  return bg;
}

std::vector<Triplet> scatter(const SimplexMesh& mesh, const std::vector<std::array<double, 16>>& local) {
  const int nv = mesh.dim + 1;
  std::vector<Triplet> triplets;
  triplets.reserve(local.size() * static_cast<std::size_t>(nv * nv));
  for (std::size_t c = 0; c < local.size(); ++c) {
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        triplets.push_back({cell_dof(mesh, c, a), cell_dof(mesh, c, b), local[c][a * 4 + b]});
      }
    }
  }
  return triplets;
}

template <class ElementFn>
SparseMatrix assemble_parallel(const SimplexMesh& mesh, ElementFn&& element) {
  std::vector<std::array<double, 16>> local(mesh.n_cells());
  const auto nc = static_cast<std::ptrdiff_t>(mesh.n_cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nc; ++c) local[static_cast<std::size_t>(c)] = element(static_cast<std::size_t>(c));
  return assemble_from_triplets(mesh.n_dofs, scatter(mesh, local));
}

// Sum of a per-cell quantity, reduced over OpenMP threads.
template <class CellFn>
double cell_sum(const SimplexMesh& mesh, CellFn&& fn) {
  const auto nc = static_cast<std::ptrdiff_t>(mesh.n_cells());
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (std::ptrdiff_t c = 0; c < nc; ++c) total += fn(static_cast<std::size_t>(c));
  return total;
}

double p1_square_integral(std::span<const double> v, int n) {
  // int over an n-simplex of (sum v_a lambda_a)^2 / volume
  double sum = 0.0, sq = 0.0;
  for (int a = 0; a <= n; ++a) {
    sum += v[a];
    sq += v[a] * v[a];
  }
  return (sq + sum * sum) / ((n + 1.0) * (n + 2.0));
}

} // namespace

void check_field(const SimplexMesh& mesh, const NodalField& field, int components, const char* who) {
  if (field.components != components ||
      field.values.size() != static_cast<std::size_t>(components) * mesh.n_dofs) {
    throw std::invalid_argument(std::string(who) + ": field does not match the mesh (expected " +
                                std::to_string(components) + " x " + std::to_string(mesh.n_dofs) +
                                " values)");
  }
}

SpaceTimeVelocity zero_velocity(const SimplexMesh& mesh) {
  return {NodalField(mesh.d, mesh.n_dofs, 0.0)};
}

SpaceTimeVelocity interpolate_velocity(const SimplexMesh& mesh,
                                       const std::vector<SpaceTimeFn>& components) {
  if (static_cast<int>(components.size()) != mesh.d) {
    throw std::invalid_argument("interpolate_velocity: need one function per spatial dimension");
  }
  SpaceTimeVelocity u{NodalField(mesh.d, mesh.n_dofs)};
  for (int k = 0; k < mesh.d; ++k) {
    auto comp = u.u.component(k);
    for (std::size_t dof = 0; dof < mesh.n_dofs; ++dof) {
      comp[dof] = components[static_cast<std::size_t>(k)](mesh.vertices[mesh.dof_node[dof]]);
    }
  }
  return u;
}

CellGeometry cell_geometry(const SimplexMesh& mesh, std::size_t c) {
  CellGeometry geo;
  const auto& cell = mesh.cells[c];
  const Point& x0 = mesh.vertices[cell[0]];
  if (mesh.dim == 2) {
    const Point& x1 = mesh.vertices[cell[1]];
    const Point& x2 = mesh.vertices[cell[2]];
    const double a = x1[0] - x0[0], b = x2[0] - x0[0];
    const double cc = x1[1] - x0[1], d = x2[1] - x0[1];
    const double det = a * d - b * cc;
    geo.volume = 0.5 * std::abs(det);
    // rows of B^{-1}
    geo.grad[1] = {d / det, -b / det, 0.0};
    geo.grad[2] = {-cc / det, a / det, 0.0};
  } else {
    std::array<std::array<double, 3>, 3> m{};
    for (int col = 0; col < 3; ++col) {
      const Point& xc = mesh.vertices[cell[col + 1]];
      for (int row = 0; row < 3; ++row) m[row][col] = xc[row] - x0[row];
    }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    geo.volume = std::abs(det) / 6.0;
    std::array<std::array<double, 3>, 3> inv{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        // cofactor of m[j][i]
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
        const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
      }
    }
    for (int a = 1; a <= 3; ++a) geo.grad[a] = inv[a - 1];
  }
  for (int k = 0; k < mesh.dim; ++k) {
    double s = 0.0;
    for (int a = 1; a <= mesh.dim; ++a) s += geo.grad[a][k];
    geo.grad[0][k] = -s;
  }
  return geo;
}

Point map_to_cell(const SimplexMesh& mesh, std::size_t c, const std::array<double, 4>& lambda) {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a <= mesh.dim; ++a) {
    const Point& x = mesh.vertices[mesh.cells[c][static_cast<std::size_t>(a)]];
    for (int k = 0; k < mesh.dim; ++k) p[k] += lambda[a] * x[k];
  }
  return p;
}

std::array<double, 16> lsq_advection_element(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                                             std::size_t c, const SimplexRule& rule) {
  const auto geo = cell_geometry(mesh, c);
  std::array<double, 16> local{};
  const int nv = mesh.dim + 1;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    std::array<double, 3> b{0.0, 0.0, 0.0};
    for (int k = 0; k < mesh.d; ++k) b[k] = velocity_at(mesh, u, c, k, rule.barycentric[q]);
    b[mesh.d] = 1.0;
    const auto bg = transport_gradients(mesh, geo, b);
    const double w = rule.weights[q] * geo.volume;
    for (int a = 0; a < nv; ++a)
      for (int bb = 0; bb < nv; ++bb) local[a * 4 + bb] += w * bg[a] * bg[bb];
  }
  return local;
}

SparseMatrix assemble_lsq_advection(const SimplexMesh& mesh, const SpaceTimeVelocity& u) {
  check_field(mesh, u.u, mesh.d, "assemble_lsq_advection");
  const auto rule = degree2_rule(mesh.dim);
  return assemble_parallel(mesh, [&](std::size_t c) { return lsq_advection_element(mesh, u, c, rule); });
}

SparseMatrix assemble_lsq_advection_serial(const SimplexMesh& mesh, const SpaceTimeVelocity& u) {
  check_field(mesh, u.u, mesh.d, "assemble_lsq_advection_serial");
  const auto rule = degree2_rule(mesh.dim);
  std::vector<std::array<double, 16>> local(mesh.n_cells());
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) local[c] = lsq_advection_element(mesh, u, c, rule);
  return assemble_from_triplets(mesh.n_dofs, scatter(mesh, local));
}

SparseMatrix assemble_mass(const SimplexMesh& mesh) {
  const int nv = mesh.dim + 1;
  const double denom = (mesh.dim + 1.0) * (mesh.dim + 2.0);
  return assemble_parallel(mesh, [&](std::size_t c) {
    const double vol = mesh.cell_volume(c);
    std::array<double, 16> local{};
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) local[a * 4 + b] = vol * (a == b ? 2.0 : 1.0) / denom;
    return local;
  });
}

SparseMatrix assemble_helmholtz(const SimplexMesh& mesh, double alpha, GradMode mode) {
  if (!(alpha > 0.0)) throw std::invalid_argument("assemble_helmholtz: alpha must be positive");
  const int nv = mesh.dim + 1;
  const int n_grad = mode == GradMode::spatial ? mesh.d : mesh.dim;
  const double denom = (mesh.dim + 1.0) * (mesh.dim + 2.0);
  const double a2 = alpha * alpha;
  return assemble_parallel(mesh, [&](std::size_t c) {
    const auto geo = cell_geometry(mesh, c);
    std::array<double, 16> local{};
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        double k = 0.0;
        for (int i = 0; i < n_grad; ++i) k += geo.grad[a][i] * geo.grad[b][i];
        local[a * 4 + b] = geo.volume * ((a == b ? 2.0 : 1.0) / denom + a2 * k);
      }
    }
    return local;
  });
}

std::vector<double> assemble_forcing(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                                     const SpaceTimeFn& f) {
  check_field(mesh, u.u, mesh.d, "assemble_forcing");
  const auto rule = degree5_rule(mesh.dim);
  const int nv = mesh.dim + 1;
  std::vector<std::array<double, 4>> local(mesh.n_cells());
  const auto nc = static_cast<std::ptrdiff_t>(mesh.n_cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < nc; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const auto geo = cell_geometry(mesh, c);
    std::array<double, 4> acc{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lambda = rule.barycentric[q];
      std::array<double, 3> b{0.0, 0.0, 0.0};
      for (int k = 0; k < mesh.d; ++k) b[k] = velocity_at(mesh, u, c, k, lambda);
      b[mesh.d] = 1.0;
      const auto bg = transport_gradients(mesh, geo, b);
      const double fw = rule.weights[q] * geo.volume * f(map_to_cell(mesh, c, lambda));
      for (int a = 0; a < nv; ++a) acc[a] += fw * bg[a];
    }
    local[c] = acc;
  }
  std::vector<double> rhs(mesh.n_dofs, 0.0);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    for (int a = 0; a < nv; ++a) rhs[cell_dof(mesh, c, a)] += local[c][a];
  return rhs;
}

ConstrainedSystem apply_dirichlet(const SparseMatrix& a, std::span<const double> rhs,
                                  const std::map<std::size_t, double>& constrained) {
  const std::size_t n = a.n;
  if (rhs.size() != n) throw std::invalid_argument("apply_dirichlet: rhs size mismatch");
  std::vector<char> fixed(n, 0);
  std::vector<double> lift(n, 0.0);
  for (const auto& [dof, value] : constrained) {
    if (dof >= n) {
      throw std::out_of_range("apply_dirichlet: constrained dof " + std::to_string(dof) +
                              " out of range for n = " + std::to_string(n));
    }
    fixed[dof] = 1;
    lift[dof] = value;
  }

  ConstrainedSystem out;
  out.rhs.assign(rhs.begin(), rhs.end());
  if (constrained.empty()) {
    out.matrix = a;
    return out;
  }
  const auto ag = multiply(a, lift);
  for (std::size_t i = 0; i < n; ++i) out.rhs[i] = fixed[i] ? lift[i] : out.rhs[i] - ag[i];

  auto& m = out.matrix;
  m.n = n;
  m.row_offsets.assign(n + 1, 0);
  m.col_indices.reserve(a.nnz());
  m.values.reserve(a.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i]) {
      m.col_indices.push_back(i);
      m.values.push_back(1.0);
    } else {
      for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
        if (fixed[a.col_indices[k]]) continue;
        m.col_indices.push_back(a.col_indices[k]);
        m.values.push_back(a.values[k]);
      }
    }
    m.row_offsets[i + 1] = m.col_indices.size();
  }
  return out;
}

std::map<std::size_t, double> boundary_constraints(const SimplexMesh& mesh, const SpaceTimeFn& i0,
                                                   const SpaceTimeFn& i1) {
  std::map<std::size_t, double> bc;
  for (auto node : mesh.gamma0_nodes) {
    const auto dof = mesh.dof_map[node];
    bc[dof] = i0(mesh.vertices[mesh.dof_node[dof]]);
  }
  for (auto node : mesh.gamma1_nodes) {
    const auto dof = mesh.dof_map[node];
    bc[dof] = i1(mesh.vertices[mesh.dof_node[dof]]);
  }
  return bc;
}

std::map<std::size_t, double> boundary_constraints(const SimplexMesh& mesh,
                                                   const NodalField& field) {
  check_field(mesh, field, 1, "boundary_constraints");
  std::map<std::size_t, double> bc;
  for (auto node : mesh.gamma0_nodes) bc[mesh.dof_map[node]] = field.values[mesh.dof_map[node]];
  for (auto node : mesh.gamma1_nodes) bc[mesh.dof_map[node]] = field.values[mesh.dof_map[node]];
  return bc;
}

NodalField interpolate(const SimplexMesh& mesh, const SpaceTimeFn& g) {
  NodalField field(1, mesh.n_dofs);
  for (std::size_t dof = 0; dof < mesh.n_dofs; ++dof) field.values[dof] = g(mesh.vertices[mesh.dof_node[dof]]);
  return field;
}

double evaluate(const SimplexMesh& mesh, const NodalField& field, const Point& p, int component) {
  const auto cell = mesh.locate(p);
  if (!cell) throw std::out_of_range("evaluate: point outside the space-time domain");
  const auto lambda = mesh.barycentric(*cell, p);
  const auto comp = field.component(component);
  double v = 0.0;
  for (int a = 0; a <= mesh.dim; ++a) v += lambda[a] * comp[cell_dof(mesh, *cell, a)];
  return v;
}

double l2_norm(const SimplexMesh& mesh, const NodalField& field) {
  check_field(mesh, field, 1, "l2_norm");
  const double sum = cell_sum(mesh, [&](std::size_t c) {
    std::array<double, 4> v{};
    for (int a = 0; a <= mesh.dim; ++a) v[a] = field.values[cell_dof(mesh, c, a)];
    return mesh.cell_volume(c) * p1_square_integral(v, mesh.dim);
  });
  return std::sqrt(sum);
}

double residual_norm(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeVelocity& u,
                     const SpaceTimeFn& f) {
  check_field(mesh, field, 1, "residual_norm");
  check_field(mesh, u.u, mesh.d, "residual_norm");
  const auto rule = f ? degree5_rule(mesh.dim) : degree2_rule(mesh.dim);
  const double sum = cell_sum(mesh, [&](std::size_t c) {
    const auto geo = cell_geometry(mesh, c);
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    for (int a = 0; a <= mesh.dim; ++a) {
      const double v = field.values[cell_dof(mesh, c, a)];
      for (int k = 0; k < mesh.dim; ++k) grad[k] += v * geo.grad[a][k];
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lambda = rule.barycentric[q];
      double r = grad[mesh.d];
      for (int k = 0; k < mesh.d; ++k) r += velocity_at(mesh, u, c, k, lambda) * grad[k];
      if (f) r -= f(map_to_cell(mesh, c, lambda));
      acc += rule.weights[q] * r * r;
    }
    return geo.volume * acc;
  });
  return std::sqrt(sum);
}

double energy_seminorm(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeVelocity& u) {
  return residual_norm(mesh, field, u, SpaceTimeFn{});
}

double graph_norm(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeVelocity& u) {
  const double l2 = l2_norm(mesh, field);
  const double e = energy_seminorm(mesh, field, u);
  return std::sqrt(l2 * l2 + e * e);
}

double boundary_norm(const SimplexMesh& mesh, const NodalField& field) {
  check_field(mesh, field, 1, "boundary_norm");
  double sum = 0.0;
  auto facet_measure = [&](const std::array<std::size_t, 3>& f) {
    const Point& a = mesh.vertices[f[0]];
    const Point& b = mesh.vertices[f[1]];
    if (mesh.d == 1) return std::abs(b[0] - a[0]);
    const Point& c = mesh.vertices[f[2]];
    return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  };
  for (const auto* facets : {&mesh.gamma0_facets, &mesh.gamma1_facets}) {
    for (const auto& f : *facets) {
      std::array<double, 3> v{};
      for (int a = 0; a < mesh.dim; ++a) v[a] = field.values[mesh.dof_map[f[a]]];
      sum += facet_measure(f) * p1_square_integral(v, mesh.d);
    }
  }
  return std::sqrt(sum);
}

double l2_error(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeFn& exact) {
  check_field(mesh, field, 1, "l2_error");
  const auto rule = degree5_rule(mesh.dim);
  const double sum = cell_sum(mesh, [&](std::size_t c) {
    std::array<double, 4> v{};
    for (int a = 0; a <= mesh.dim; ++a) v[a] = field.values[cell_dof(mesh, c, a)];
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lambda = rule.barycentric[q];
      double fh = 0.0;
      for (int a = 0; a <= mesh.dim; ++a) fh += lambda[a] * v[a];
      const double e = exact(map_to_cell(mesh, c, lambda)) - fh;
      acc += rule.weights[q] * e * e;
    }
    return mesh.cell_volume(c) * acc;
  });
  return std::sqrt(sum);
}

double energy_error(const SimplexMesh& mesh, const NodalField& field,
                    const std::vector<SpaceTimeFn>& velocity, const SpaceTimeFn& material_derivative) {
  check_field(mesh, field, 1, "energy_error");
  if (static_cast<int>(velocity.size()) != mesh.d) {
    throw std::invalid_argument("energy_error: need one velocity function per spatial dimension");
  }
  const auto rule = degree5_rule(mesh.dim);
  const double sum = cell_sum(mesh, [&](std::size_t c) {
    const auto geo = cell_geometry(mesh, c);
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    for (int a = 0; a <= mesh.dim; ++a) {
      const double v = field.values[cell_dof(mesh, c, a)];
      for (int k = 0; k < mesh.dim; ++k) grad[k] += v * geo.grad[a][k];
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point p = map_to_cell(mesh, c, rule.barycentric[q]);
      double bh = grad[mesh.d];
      for (int k = 0; k < mesh.d; ++k) bh += velocity[static_cast<std::size_t>(k)](p) * grad[k];
      const double e = (material_derivative ? material_derivative(p) : 0.0) - bh;
      acc += rule.weights[q] * e * e;
    }
    return geo.volume * acc;
  });
  return std::sqrt(sum);
}

} // namespace stm

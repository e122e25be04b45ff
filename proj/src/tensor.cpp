#include "stmeta/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stm {

namespace {

constexpr int kGauss = 3;

struct BoxIndex {
  int i = 0, j = 0, k = 0;
};

BoxIndex box_index(const SimplexMesh& mesh, std::size_t box) {
  const auto ns = static_cast<std::size_t>(mesh.n_space);
  BoxIndex b;
  b.i = static_cast<int>(box % ns);
  if (mesh.d == 1) {
    b.k = static_cast<int>(box / ns);
  } else {
    b.j = static_cast<int>((box / ns) % ns);
    b.k = static_cast<int>(box / (ns * ns));
  }
  return b;
}

int n_corners(const SimplexMesh& mesh) { return 1 << mesh.dim; }

// Shape values and space-time gradients at reference point xi of a box.
struct ShapeEval {
  std::array<double, 8> n{};
  std::array<std::array<double, 3>, 8> grad{};
  Point x{0.0, 0.0, 0.0};
};

ShapeEval shape(const SimplexMesh& mesh, const BoxIndex& b, const std::array<double, 3>& xi) {
  const double hs = mesh.h_space(), ht = mesh.h_time();
  std::array<double, 3> h{hs, mesh.d == 2 ? hs : ht, ht};
  const std::array<int, 3> base{b.i, mesh.d == 2 ? b.j : b.k, b.k};
  ShapeEval s;
  for (int a = 0; a < mesh.dim; ++a) s.x[a] = (base[a] + xi[a]) * h[a];
  for (int c = 0; c < n_corners(mesh); ++c) {
    double value = 1.0;
    std::array<double, 3> f{}, df{};
    for (int a = 0; a < mesh.dim; ++a) {
      const bool hi = ((c >> a) & 1) != 0;
      f[a] = hi ? xi[a] : 1.0 - xi[a];
      df[a] = (hi ? 1.0 : -1.0) / h[a];
      value *= f[a];
    }
    s.n[c] = value;
    for (int a = 0; a < mesh.dim; ++a) {
      double g = df[a];
      for (int o = 0; o < mesh.dim; ++o)
        if (o != a) g *= f[o];
      s.grad[c][a] = g;
    }
  }
  return s;
}

struct BoxRule {
  std::vector<std::array<double, 3>> xi;
  std::vector<double> w; // times the box volume
};

BoxRule box_rule(const SimplexMesh& mesh) {
  std::vector<double> nodes, weights;
  gauss_legendre_unit(kGauss, nodes, weights);
  const double vol = std::pow(mesh.h_space(), mesh.d) * mesh.h_time();
  BoxRule r;
  const int n = kGauss;
  const int total = mesh.dim == 2 ? n * n : n * n * n;
  for (int q = 0; q < total; ++q) {
    std::array<double, 3> xi{0.0, 0.0, 0.0};
    double w = vol;
    int rest = q;
    for (int a = 0; a < mesh.dim; ++a) {
      xi[a] = nodes[static_cast<std::size_t>(rest % n)];
      w *= weights[static_cast<std::size_t>(rest % n)];
      rest /= n;
    }
    r.xi.push_back(xi);
    r.w.push_back(w);
  }
  return r;
}

void check_velocity(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity, const char* who) {
  if (static_cast<int>(velocity.size()) != mesh.d)
    throw std::invalid_argument(std::string(who) + ": need one velocity function per spatial dimension");
}

// b . grad psi_c at one quadrature point.
std::array<double, 8> transport(const SimplexMesh& mesh, const ShapeEval& s,
                                const std::vector<SpaceTimeFn>& velocity) {
  std::array<double, 3> b{0.0, 0.0, 0.0};
  for (int k = 0; k < mesh.d; ++k) b[k] = velocity[static_cast<std::size_t>(k)](s.x);
  b[mesh.d] = 1.0;
  std::array<double, 8> bg{};
  for (int c = 0; c < n_corners(mesh); ++c) {
    double v = 0.0;
    for (int a = 0; a < mesh.dim; ++a) v += b[a] * s.grad[c][a];
    bg[c] = v;
  }
  return bg;
}

using Local = std::array<double, 64>;

Local lsq_element(const SimplexMesh& mesh, const BoxRule& rule, std::size_t box,
                  const std::vector<SpaceTimeFn>& velocity) {
  const auto b = box_index(mesh, box);
  const int nc = n_corners(mesh);
  Local local{};
  for (std::size_t q = 0; q < rule.w.size(); ++q) {
    const auto s = shape(mesh, b, rule.xi[q]);
    const auto bg = transport(mesh, s, velocity);
    for (int p = 0; p < nc; ++p)
      for (int r = 0; r < nc; ++r) local[p * 8 + r] += rule.w[q] * bg[p] * bg[r];
  }
  return local;
}

SparseMatrix scatter(const SimplexMesh& mesh, const std::vector<Local>& local) {
  const int nc = n_corners(mesh);
  std::vector<Triplet> triplets;
  triplets.reserve(local.size() * static_cast<std::size_t>(nc * nc));
  for (std::size_t box = 0; box < local.size(); ++box) {
    const auto dofs = q1_box_dofs(mesh, box);
    for (int p = 0; p < nc; ++p)
      for (int r = 0; r < nc; ++r) triplets.push_back({dofs[p], dofs[r], local[box][p * 8 + r]});
  }
  return assemble_from_triplets(mesh.n_dofs, std::move(triplets));
}

template <class BoxFn>
double box_sum(const SimplexMesh& mesh, BoxFn&& fn) {
  const auto nb = static_cast<std::ptrdiff_t>(q1_box_count(mesh));
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (std::ptrdiff_t box = 0; box < nb; ++box) total += fn(static_cast<std::size_t>(box));
  return total;
}

double field_at(const SimplexMesh& mesh, const NodalField& field, const std::array<std::size_t, 8>& dofs,
                const ShapeEval& s) {
  double v = 0.0;
  for (int c = 0; c < n_corners(mesh); ++c) v += s.n[c] * field.values[dofs[c]];
  return v;
}

} // namespace

std::size_t q1_box_count(const SimplexMesh& mesh) {
  const auto ns = static_cast<std::size_t>(mesh.n_space);
  return (mesh.d == 1 ? ns : ns * ns) * static_cast<std::size_t>(mesh.n_time);
}

std::array<std::size_t, 8> q1_box_dofs(const SimplexMesh& mesh, std::size_t box) {
  const auto b = box_index(mesh, box);
  std::array<std::size_t, 8> dofs{};
  for (int c = 0; c < n_corners(mesh); ++c) {
    const int di = c & 1;
    std::size_t node = 0;
    if (mesh.d == 1) {
      node = mesh.node_index(b.i + di, 0, b.k + ((c >> 1) & 1));
    } else {
      node = mesh.node_index(b.i + di, b.j + ((c >> 1) & 1), b.k + ((c >> 2) & 1));
    }
    dofs[c] = mesh.dof_map[node];
  }
  return dofs;
}

SparseMatrix assemble_lsq_advection_q1(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity) {
  check_velocity(mesh, velocity, "assemble_lsq_advection_q1");
  const auto rule = box_rule(mesh);
  std::vector<Local> local(q1_box_count(mesh));
  const auto nb = static_cast<std::ptrdiff_t>(local.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t box = 0; box < nb; ++box) {
    local[static_cast<std::size_t>(box)] = lsq_element(mesh, rule, static_cast<std::size_t>(box), velocity);
  }
  return scatter(mesh, local);
}

SparseMatrix assemble_lsq_advection_q1_serial(const SimplexMesh& mesh,
                                              const std::vector<SpaceTimeFn>& velocity) {
  check_velocity(mesh, velocity, "assemble_lsq_advection_q1_serial");
  const auto rule = box_rule(mesh);
  std::vector<Local> local(q1_box_count(mesh));
  for (std::size_t box = 0; box < local.size(); ++box) local[box] = lsq_element(mesh, rule, box, velocity);
  return scatter(mesh, local);
}

std::vector<double> assemble_forcing_q1(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity,
                                        const SpaceTimeFn& f) {
  check_velocity(mesh, velocity, "assemble_forcing_q1");
  const auto rule = box_rule(mesh);
  const int nc = n_corners(mesh);
  std::vector<std::array<double, 8>> local(q1_box_count(mesh));
  const auto nb = static_cast<std::ptrdiff_t>(local.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < nb; ++bi) {
    const auto box = static_cast<std::size_t>(bi);
    const auto b = box_index(mesh, box);
    std::array<double, 8> acc{};
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const auto s = shape(mesh, b, rule.xi[q]);
      const auto bg = transport(mesh, s, velocity);
      const double fv = f(s.x) * rule.w[q];
      for (int c = 0; c < nc; ++c) acc[c] += fv * bg[c];
    }
    local[box] = acc;
  }
  std::vector<double> rhs(mesh.n_dofs, 0.0);
  for (std::size_t box = 0; box < local.size(); ++box) {
    const auto dofs = q1_box_dofs(mesh, box);
    for (int c = 0; c < nc; ++c) rhs[dofs[c]] += local[box][c];
  }
  return rhs;
}

double evaluate_q1(const SimplexMesh& mesh, const NodalField& field, const Point& p) {
  check_field(mesh, field, 1, "evaluate_q1");
  std::array<double, 3> xi{};
  BoxIndex b;
  auto cell = [](double x, int n, double& local) {
    const double s = std::clamp(x, 0.0, 1.0) * n;
    const int c = std::min(static_cast<int>(std::floor(s)), n - 1);
    local = s - c;
    return c;
  };
  b.i = cell(p[0], mesh.n_space, xi[0]);
  if (mesh.d == 2) b.j = cell(p[1], mesh.n_space, xi[1]);
  b.k = cell(p[mesh.d], mesh.n_time, xi[mesh.d]);
  const auto ns = static_cast<std::size_t>(mesh.n_space);
  const std::size_t box = mesh.d == 1 ? static_cast<std::size_t>(b.k) * ns + static_cast<std::size_t>(b.i)
                                      : (static_cast<std::size_t>(b.k) * ns + static_cast<std::size_t>(b.j)) * ns +
                                            static_cast<std::size_t>(b.i);
  return field_at(mesh, field, q1_box_dofs(mesh, box), shape(mesh, b, xi));
}

double q1_l2_norm(const SimplexMesh& mesh, const NodalField& field) {
  return q1_l2_error(mesh, field, [](const Point&) { return 0.0; });
}

double q1_l2_error(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeFn& exact) {
  check_field(mesh, field, 1, "q1_l2_error");
  const auto rule = box_rule(mesh);
  const double sq = box_sum(mesh, [&](std::size_t box) {
    const auto b = box_index(mesh, box);
    const auto dofs = q1_box_dofs(mesh, box);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const auto s = shape(mesh, b, rule.xi[q]);
      const double e = field_at(mesh, field, dofs, s) - exact(s.x);
      acc += rule.w[q] * e * e;
    }
    return acc;
  });
  return std::sqrt(sq);
}

double q1_residual_norm(const SimplexMesh& mesh, const NodalField& field,
                        const std::vector<SpaceTimeFn>& velocity, const SpaceTimeFn& f) {
  check_field(mesh, field, 1, "q1_residual_norm");
  check_velocity(mesh, velocity, "q1_residual_norm");
  const auto rule = box_rule(mesh);
  const int nc = n_corners(mesh);
  const double sq = box_sum(mesh, [&](std::size_t box) {
    const auto b = box_index(mesh, box);
    const auto dofs = q1_box_dofs(mesh, box);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const auto s = shape(mesh, b, rule.xi[q]);
      const auto bg = transport(mesh, s, velocity);
      double r = f ? -f(s.x) : 0.0;
      for (int c = 0; c < nc; ++c) r += bg[c] * field.values[dofs[c]];
      acc += rule.w[q] * r * r;
    }
    return acc;
  });
  return std::sqrt(sq);
}

} // namespace stm

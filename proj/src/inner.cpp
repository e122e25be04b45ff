#include "stmeta/inner.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace stm {

namespace {

InnerSolution solve_system(const SimplexMesh& mesh, const SparseMatrix& a, std::vector<double> rhs,
                           const std::map<std::size_t, double>& boundary, const CgOptions& cg,
                           std::span<const double> initial_guess) {
  auto system = apply_dirichlet(a, rhs, boundary);
  std::vector<double> guess;
  if (initial_guess.size() == mesh.n_dofs) {
    guess.assign(initial_guess.begin(), initial_guess.end());
    for (const auto& [dof, value] : boundary) guess[dof] = value;
  }
  auto solved = cg_solve(system.matrix, system.rhs, cg, guess);
  if (!solved.report.converged) {
    throw SolveError("inner solve did not converge (relative residual " +
                         std::to_string(solved.report.final_relative_residual) + " after " +
                         std::to_string(solved.report.iterations) + " iterations)",
                     solved.report);
  }
  InnerSolution sol;
  sol.image = NodalField(1, mesh.n_dofs);
  sol.image.values = std::move(solved.x);
  // Constrained dofs carry the data exactly.
  for (const auto& [dof, value] : boundary) sol.image.values[dof] = value;
  sol.cg = solved.report;
  return sol;
}

} // namespace

InnerSolution solve_inner(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                          const std::map<std::size_t, double>& boundary, const SpaceTimeFn& forcing,
                          const CgOptions& cg, std::span<const double> initial_guess) {
  check_field(mesh, u.u, mesh.d, "solve_inner");
  const auto a = assemble_lsq_advection(mesh, u);
  std::vector<double> rhs = forcing ? assemble_forcing(mesh, u, forcing)
                                    : std::vector<double>(mesh.n_dofs, 0.0);
  auto sol = solve_system(mesh, a, std::move(rhs), boundary, cg, initial_guess);
  const double r = residual_norm(mesh, sol.image, u, forcing);
  sol.energy = r * r;
  return sol;
}

InnerSolution solve_inner_q1(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity,
                             const std::map<std::size_t, double>& boundary, const SpaceTimeFn& forcing,
                             const CgOptions& cg) {
  const auto a = assemble_lsq_advection_q1(mesh, velocity);
  std::vector<double> rhs = forcing ? assemble_forcing_q1(mesh, velocity, forcing)
                                    : std::vector<double>(mesh.n_dofs, 0.0);
  auto sol = solve_system(mesh, a, std::move(rhs), boundary, cg, {});
  const double r = q1_residual_norm(mesh, sol.image, velocity, forcing);
  sol.energy = r * r;
  return sol;
}

InnerSolution solve_inner(const SimplexMesh& mesh, const SpaceTimeVelocity& u, const SpaceTimeFn& i0,
                          const SpaceTimeFn& i1, const SpaceTimeFn& forcing, const CgOptions& cg) {
  return solve_inner(mesh, u, boundary_constraints(mesh, i0, i1), forcing, cg);
}

double observed_order(double h_inv_prev, double e_prev, double h_inv, double e) {
  return std::log(e_prev / e) / std::log(h_inv / h_inv_prev);
}

double fitted_order(const std::vector<double>& h_inverses, const std::vector<double>& errors) {
  const std::size_t n = h_inverses.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h_inverses[i]);
    const double y = -std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(n);
  return (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
}

namespace {

SimplexMesh level_mesh(const ManufacturedCase& mc, int h_inverse, const ConvergenceOptions& options) {
  const int n_time = options.n_time > 0 ? options.n_time : h_inverse;
  return build_space_time_mesh(mc.dim, h_inverse, n_time, options.periodic);
}

SpaceTimeFn slice_fn(const ManufacturedCase& mc, double t) {
  const auto img = mc.exact_image;
  const int d = mc.dim;
  return [img, d, t](const Point& p) {
    Point q = p;
    q[d] = t;
    return img(q);
  };
}

} // namespace

ConvergenceReport run_convergence_study(const ManufacturedCase& mc, const std::vector<int>& h_inverses,
                                        const ConvergenceOptions& options) {
  ConvergenceReport report;
  report.dim = mc.dim;
  report.case_id = mc.id;
  const SpaceTimeFn forcing = mc.pure_transport ? SpaceTimeFn{} : mc.forcing;
  std::optional<std::size_t> prev;
  for (int h_inv : h_inverses) {
    ConvergenceLevel level;
    level.h_inverse = h_inv;
    try {
      const auto mesh = level_mesh(mc, h_inv, options);
      const auto bc = boundary_constraints(mesh, slice_fn(mc, 0.0), slice_fn(mc, 1.0));
      const bool q1 = options.element == ElementFamily::tensor_q1;
      const auto sol = q1 ? solve_inner_q1(mesh, mc.velocity, bc, forcing, options.cg)
                          : solve_inner(mesh, interpolate_velocity(mesh, mc.velocity), bc, forcing, options.cg);
      level.cg_iterations = sol.cg.iterations;
      if (options.reference == ErrorReference::interpolant) {
        NodalField diff = sol.image;
        const auto pi = interpolate(mesh, mc.exact_image);
        for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= pi.values[i];
        level.l2_error = q1 ? q1_l2_norm(mesh, diff) : l2_norm(mesh, diff);
        level.energy_error = q1 ? q1_residual_norm(mesh, diff, mc.velocity)
                                : energy_error(mesh, diff, mc.velocity, {});
      } else if (q1) {
        level.l2_error = q1_l2_error(mesh, sol.image, mc.exact_image);
        level.energy_error = q1_residual_norm(mesh, sol.image, mc.velocity, mc.forcing);
      } else {
        level.l2_error = l2_error(mesh, sol.image, mc.exact_image);
        level.energy_error = energy_error(mesh, sol.image, mc.velocity, mc.forcing);
      }
    } catch (const std::exception& e) {
      level.ok = false;
      level.failure = e.what();
    }
    report.levels.push_back(level);
    auto& cur = report.levels.back();
    if (cur.ok) {
      if (prev) {
        const auto& p = report.levels[*prev];
        cur.l2_order = observed_order(p.h_inverse, p.l2_error, cur.h_inverse, cur.l2_error);
        cur.energy_order = observed_order(p.h_inverse, p.energy_error, cur.h_inverse, cur.energy_error);
      }
      prev = report.levels.size() - 1;
    }
  }
  return report;
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream out;
  out << "h_inv,l2_error,l2_order,energy_error,energy_order\n";
  char buf[64];
  auto sci = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };
  auto order = [&](const std::optional<double>& v) {
    if (!v) return std::string();
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  for (const auto& level : levels) {
    if (!level.ok) {
      out << level.h_inverse << ",nan,,nan,\n";
      continue;
    }
    out << level.h_inverse << ',' << sci(level.l2_error) << ',' << order(level.l2_order) << ','
        << sci(level.energy_error) << ',' << order(level.energy_order) << '\n';
  }
  return out.str();
}

bool ConvergenceReport::all_ok() const {
  for (const auto& level : levels)
    if (!level.ok) return false;
  return true;
}

QuasiOptimality quasi_optimality_check(const ManufacturedCase& mc, int h_inverse,
                                       const ConvergenceOptions& options) {
  const auto mesh = level_mesh(mc, h_inverse, options);
  const auto u = interpolate_velocity(mesh, mc.velocity);
  const SpaceTimeFn forcing = mc.pure_transport ? SpaceTimeFn{} : mc.forcing;
  const auto sol = solve_inner(mesh, u, slice_fn(mc, 0.0), slice_fn(mc, 1.0), forcing, options.cg);
  const auto interp = interpolate(mesh, mc.exact_image);

  QuasiOptimality q;
  q.discrete_error = energy_error(mesh, sol.image, mc.velocity, mc.forcing);
  q.interpolation_error = energy_error(mesh, interp, mc.velocity, mc.forcing);
  constexpr double kUnderflow = 1e-13;
  if (q.interpolation_error < kUnderflow) {
    q.exact = q.discrete_error < 1e-10;
    q.ratio = q.exact ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    q.ratio = q.discrete_error / q.interpolation_error;
  }
  return q;
}

std::vector<SpaceTimeFn> random_smooth_fields(int dim, int count, std::uint64_t seed) {
  constexpr int kModes = 3; // spatial frequencies 0..2 per axis
  constexpr int kDegree = 3; // 1, t, t^2
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int ny = dim == 2 ? kModes : 1;
  std::vector<SpaceTimeFn> out;
  for (int f = 0; f < count; ++f) {
    // coef[((kx * ny + ky) * 4 + trig) * kDegree + p]; trig picks cos/sin per axis.
    std::vector<double> coef(static_cast<std::size_t>(kModes * ny * 4 * kDegree));
    for (int kx = 0; kx < kModes; ++kx)
      for (int ky = 0; ky < ny; ++ky)
        for (int trig = 0; trig < 4; ++trig)
          for (int p = 0; p < kDegree; ++p)
            coef[static_cast<std::size_t>(((kx * ny + ky) * 4 + trig) * kDegree + p)] =
                normal(rng) / (1.0 + kx + ky);
    out.emplace_back([coef, dim, ny](const Point& q) {
      const double tt = q[dim];
      const double tp[kDegree] = {1.0, tt, tt * tt};
      double v = 0.0;
      for (int kx = 0; kx < kModes; ++kx) {
        const double ax = 2.0 * std::numbers::pi * kx * q[0];
        const double cx[2] = {std::cos(ax), std::sin(ax)};
        for (int ky = 0; ky < ny; ++ky) {
          const double ay = dim == 2 ? 2.0 * std::numbers::pi * ky * q[1] : 0.0;
          const double cy[2] = {std::cos(ay), std::sin(ay)};
          for (int trig = 0; trig < 4; ++trig) {
            const double s = cx[trig & 1] * cy[trig >> 1];
            for (int p = 0; p < kDegree; ++p)
              v += coef[static_cast<std::size_t>(((kx * ny + ky) * 4 + trig) * kDegree + p)] * s * tp[p];
          }
        }
      }
      return v;
    });
  }
  return out;
}

InequalityConstants inequality_constants(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                                         const std::vector<SpaceTimeFn>& fields) {
  InequalityConstants c;
  for (const auto& g : fields) {
    const NodalField f = interpolate(mesh, g);
    const double gamma = std::pow(boundary_norm(mesh, f), 2);
    const double l2 = std::pow(l2_norm(mesh, f), 2);
    const double energy = std::pow(energy_seminorm(mesh, f, u), 2);
    if (l2 + energy > 0.0) c.trace = std::max(c.trace, gamma / (l2 + energy));
    if (gamma + energy > 0.0) c.poincare = std::max(c.poincare, l2 / (gamma + energy));
  }
  return c;
}

} // namespace stm

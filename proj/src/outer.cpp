#include "stmeta/outer.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <random>
#include <sstream>

namespace stm {

namespace {

double dot_vec(const std::vector<double>& a, const std::vector<double>& b) { return dot(a, b); }

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

NodalField shifted(const NodalField& v, double a, const std::vector<double>& dir) {
  NodalField out = v;
  axpy(a, dir, out.values);
  return out;
}

struct Pair {
  std::vector<double> s, y;
  double rho = 0.0;
};

// H g by the two-loop recursion, H0 = (s^T y / y^T y) I from the newest pair.
std::vector<double> two_loop(const std::deque<Pair>& memory, const std::vector<double>& g) {
  std::vector<double> q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * dot_vec(memory[i].s, q);
    axpy(-alpha[i], memory[i].y, q);
  }
  const auto& last = memory.back();
  const double gamma = dot_vec(last.s, last.y) / dot_vec(last.y, last.y);
  for (auto& v : q) v *= gamma;
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * dot_vec(memory[i].y, q);
    axpy(alpha[i] - beta, memory[i].s, q);
  }
  return q;
}

} // namespace

const char* to_string(MinimizeStatus status) {
  switch (status) {
    case MinimizeStatus::converged: return "converged";
    case MinimizeStatus::max_iterations: return "max_iterations";
    case MinimizeStatus::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

std::string MinimizeResult::trace_csv() const {
  std::ostringstream out;
  out << "iter,objective,grad_norm,step_length,inner_cg_iters\n";
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.10e,%.6e,%.6e,%zu\n", r.iter, r.objective, r.grad_norm,
                  r.step_length, r.inner_cg_iters);
    out << buf;
  }
  return out.str();
}

OuterProblem::OuterProblem(const SimplexMesh& mesh, std::map<std::size_t, double> boundary,
                           OuterConfig config)
    : mesh_(&mesh), boundary_(std::move(boundary)), config_(config) {
  if (!(config_.sigma_inv2 > 0.0)) throw std::invalid_argument("OuterProblem: sigma_inv2 must be > 0");
  if (config_.lbfgs_memory < 1) throw std::invalid_argument("OuterProblem: lbfgs_memory must be >= 1");
  mass_ = assemble_mass(mesh);
  const auto helmholtz = assemble_helmholtz(mesh, config_.alpha, config_.grad_mode);
  std::map<std::size_t, double> clamp;
  if (!mesh.periodic) {
    clamped_ = nodes_to_dofs(mesh, mesh.lateral_nodes);
    for (auto dof : clamped_) clamp[dof] = 0.0;
  }
  helmholtz_ = apply_dirichlet(helmholtz, std::vector<double>(mesh.n_dofs, 0.0), clamp).matrix;
}

std::vector<double> OuterProblem::helmholtz_solve(std::vector<double> rhs) const {
  for (auto dof : clamped_) rhs[dof] = 0.0;
  CgOptions opt;
  opt.tol_rel = config_.helmholtz_tol;
  auto res = cg_solve(helmholtz_, rhs, opt);
  if (!res.report.converged) {
    throw SolveError("Helmholtz solve did not converge (relative residual " +
                         std::to_string(res.report.final_relative_residual) + ")",
                     res.report);
  }
  for (auto dof : clamped_) res.x[dof] = 0.0;
  return res.x;
}

std::vector<double> OuterProblem::cascade(std::span<const double> v) const {
  std::vector<double> w(v.begin(), v.end());
  for (int stage = 0; stage < 3; ++stage) w = helmholtz_solve(multiply(mass_, w));
  return w;
}

std::vector<double> OuterProblem::cascade_transpose(std::span<const double> g) const {
  std::vector<double> w(g.begin(), g.end());
  for (int stage = 0; stage < 3; ++stage) w = multiply(mass_, helmholtz_solve(std::move(w)));
  return w;
}

SpaceTimeVelocity OuterProblem::smooth_control(const NodalField& v0) const {
  check_field(*mesh_, v0, mesh_->d, "smooth_control");
  SpaceTimeVelocity u{NodalField(mesh_->d, mesh_->n_dofs)};
  for (int k = 0; k < mesh_->d; ++k) {
    const auto w = cascade(v0.component(k));
    std::copy(w.begin(), w.end(), u.u.component(k).begin());
  }
  return u;
}

OuterState OuterProblem::reduced_objective(const NodalField& v0, const OuterState* warm) const {
  OuterState st;
  st.control = v0;
  st.derived_from = v0.values;
  st.velocity = smooth_control(v0);
  CgOptions cg;
  cg.tol_rel = config_.inner_tol;
  std::span<const double> guess;
  if (warm != nullptr) guess = warm->image.image.values;
  st.image = solve_inner(*mesh_, st.velocity, boundary_, {}, cg, guess);
  double reg = 0.0;
  for (int k = 0; k < mesh_->d; ++k) {
    const auto comp = v0.component(k);
    reg += dot(comp, multiply(mass_, comp));
  }
  st.regularization = 0.5 * reg;
  st.matching_energy = st.image.energy;
  st.objective = st.regularization + config_.sigma_inv2 * st.matching_energy;
  return st;
}

NodalField OuterProblem::matching_gradient(const OuterState& state) const {
  const auto& mesh = *mesh_;
  const int nv = mesh.dim + 1;
  const auto rule = degree2_rule(mesh.dim);
  const auto& img = state.image.image.values;
  const auto& u = state.velocity.u;
  // local[c][k * 4 + a]
  std::vector<std::array<double, 8>> local(mesh.n_cells());
  const auto nc = static_cast<std::ptrdiff_t>(mesh.n_cells());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < nc; ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const auto geo = cell_geometry(mesh, c);
    std::array<std::size_t, 4> dofs{};
    for (int a = 0; a < nv; ++a) dofs[a] = mesh.dof_map[mesh.cells[c][static_cast<std::size_t>(a)]];
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    for (int a = 0; a < nv; ++a)
      for (int k = 0; k < mesh.dim; ++k) grad[k] += img[dofs[a]] * geo.grad[a][k];
    std::array<double, 8> acc{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.barycentric[q];
      double bg = grad[mesh.d];
      for (int k = 0; k < mesh.d; ++k) {
        double uk = 0.0;
        for (int a = 0; a < nv; ++a) uk += lam[a] * u.component(k)[dofs[a]];
        bg += uk * grad[k];
      }
      const double w = rule.weights[q] * geo.volume * bg;
      for (int k = 0; k < mesh.d; ++k)
        for (int a = 0; a < nv; ++a) acc[k * 4 + a] += w * lam[a] * grad[k];
    }
    local[c] = acc;
  }
  NodalField g(mesh.d, mesh.n_dofs);
  const double scale = 2.0 * config_.sigma_inv2;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    for (int a = 0; a < nv; ++a) {
      const auto dof = mesh.dof_map[mesh.cells[c][static_cast<std::size_t>(a)]];
      for (int k = 0; k < mesh.d; ++k) g.component(k)[dof] += scale * local[c][k * 4 + a];
    }
  }
  return g;
}

NodalField OuterProblem::reduced_gradient(const OuterState& state) const {
  check_field(*mesh_, state.control, mesh_->d, "reduced_gradient");
  if (state.derived_from != state.control.values) {
    throw StaleStateError("reduced_gradient: the control was modified after its velocity was computed");
  }
  const auto gu = matching_gradient(state);
  NodalField g(mesh_->d, mesh_->n_dofs);
  for (int k = 0; k < mesh_->d; ++k) {
    const auto pulled = cascade_transpose(gu.component(k));
    const auto mv = multiply(mass_, state.control.component(k));
    auto out = g.component(k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mv[i] + pulled[i];
  }
  return g;
}

MinimizeResult OuterProblem::minimize(const NodalField& v0_init, const Observer& observer) const {
  MinimizeResult result;
  OuterState x = reduced_objective(v0_init);
  std::vector<double> g = reduced_gradient(x).values;
  double gnorm = norm2(g);
  x.gradient_norm = gnorm;
  const double tol = std::max(config_.grad_tol_abs, config_.grad_tol_rel * gnorm);

  auto record = [&](int iter, double step) {
    IterationRecord r{iter, x.objective, x.gradient_norm, step, x.image.cg.iterations, x.matching_energy};
    result.trace.push_back(r);
    if (observer) observer(x, r);
  };
  record(0, 0.0);

  std::deque<Pair> memory;
  result.status = MinimizeStatus::max_iterations;
  if (gnorm <= tol) {
    result.status = MinimizeStatus::converged;
  } else {
    for (int iter = 1; iter <= config_.max_outer_iters; ++iter) {
      bool accepted = false;
      double step = 0.0;
      OuterState trial;
      std::vector<double> p;
      // Quasi-Newton direction first, steepest descent as the fallback.
      for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
        bool steepest = memory.empty();
        if (!steepest) {
          p = two_loop(memory, g);
          for (auto& v : p) v = -v;
          if (dot_vec(g, p) >= 0.0) {
            memory.clear();
            steepest = true;
          }
        }
        if (steepest) {
          p = g;
          for (auto& v : p) v = -v / gnorm;
        }
        const double slope = dot_vec(g, p);
        double alpha = config_.initial_step;
        for (int bt = 0; bt <= config_.max_backtracks; ++bt, alpha *= config_.backtrack) {
          double f = std::numeric_limits<double>::infinity();
          try {
            trial = reduced_objective(shifted(x.control, alpha, p), &x);
            f = trial.objective;
          } catch (const SolveError&) {
            // treated as a rejected step
          }
          if (std::isfinite(f) && f <= x.objective + config_.armijo_c1 * alpha * slope) {
            accepted = true;
            step = alpha;
            break;
          }
        }
        if (!accepted) {
          if (steepest) break;
          memory.clear();
        }
      }
      if (!accepted) {
        result.status = MinimizeStatus::line_search_failed;
        result.message = "line search failed after " + std::to_string(config_.max_backtracks) +
                         " backtracks at iteration " + std::to_string(iter);
        break;
      }
      std::vector<double> g_new = reduced_gradient(trial).values;
      Pair pair;
      pair.s = p;
      for (auto& v : pair.s) v *= step;
      pair.y = g_new;
      axpy(-1.0, g, pair.y);
      const double sy = dot_vec(pair.s, pair.y);
      if (sy > 1e-12 * norm2(pair.s) * norm2(pair.y)) {
        pair.rho = 1.0 / sy;
        memory.push_back(std::move(pair));
        if (static_cast<int>(memory.size()) > config_.lbfgs_memory) memory.pop_front();
      }
      x = std::move(trial);
      g = std::move(g_new);
      gnorm = norm2(g);
      x.gradient_norm = gnorm;
      x.iteration = iter;
      record(iter, step);
      if (gnorm <= tol) {
        result.status = MinimizeStatus::converged;
        break;
      }
    }
  }
  if (result.message.empty()) {
    result.message = std::string(to_string(result.status)) + " after " + std::to_string(x.iteration) +
                     " iterations";
  }
  result.state = std::move(x);
  return result;
}

GradientCheck check_gradient(const OuterProblem& problem, const NodalField& v0, int n_directions,
                             double step, std::uint64_t seed) {
  GradientCheck out;
  const auto state = problem.reduced_objective(v0);
  const auto grad = problem.reduced_gradient(state);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < n_directions; ++i) {
    std::vector<double> d(v0.values.size());
    for (auto& v : d) v = normal(rng);
    const double n = norm2(d);
    for (auto& v : d) v /= n;
    const double plus = problem.reduced_objective(shifted(v0, step, d), &state).objective;
    const double minus = problem.reduced_objective(shifted(v0, -step, d), &state).objective;
    const double fd = (plus - minus) / (2.0 * step);
    const double an = dot(grad.values, d);
    // Both sides at roundoff level count as agreement.
    const double scale = std::max(std::abs(an), std::abs(fd));
    const double rel = scale > 1e-13 ? std::abs(fd - an) / scale : 0.0;
    out.directional.push_back(an);
    out.finite_difference.push_back(fd);
    out.relative_error.push_back(rel);
    out.max_relative_error = std::max(out.max_relative_error, rel);
  }
  return out;
}

std::vector<ImageFrame> sample_frames(const SimplexMesh& mesh, const NodalField& image,
                                      const std::vector<double>& times) {
  std::vector<ImageFrame> frames;
  for (double t : times) {
    ImageFrame f;
    f.t = t;
    f.nx = mesh.n_space + 1;
    f.ny = mesh.d == 2 ? mesh.n_space + 1 : 1;
    for (int j = 0; j < f.ny; ++j) {
      for (int i = 0; i < f.nx; ++i) {
        const double x = static_cast<double>(i) / mesh.n_space;
        const double y = static_cast<double>(j) / mesh.n_space;
        const Point p = mesh.d == 1 ? Point{x, t, 0.0} : Point{x, y, t};
        f.values.push_back(evaluate(mesh, image, p));
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

} // namespace stm

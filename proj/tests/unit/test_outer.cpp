#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stmeta/outer.hpp"

using namespace stm;

namespace {

const double kPi = std::numbers::pi;

double gauss0(const Point& p) { return std::exp(-100.0 * (p[0] - 0.375) * (p[0] - 0.375)); }
double gauss1(const Point& p) { return std::exp(-100.0 * (p[0] - 0.625) * (p[0] - 0.625)); }

NodalField random_control(const SimplexMesh& mesh, std::uint64_t seed, double scale = 0.1) {
  NodalField v(mesh.d, mesh.n_dofs);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& x : v.values) x = normal(rng);
  return v;
}

} // namespace

TEST_CASE("cascade keeps constants and damps a sine by the Helmholtz symbol cubed") {
  const auto mesh = build_space_time_mesh(1, 64, 8, true);
  OuterProblem problem(mesh, boundary_constraints(mesh, gauss0, gauss1));
  const std::vector<double> c(mesh.n_dofs, 0.7);
  for (double v : problem.cascade(c)) CHECK(v == doctest::Approx(0.7).epsilon(1e-10));
  const auto s = interpolate(mesh, [](const Point& p) { return std::sin(2.0 * kPi * p[0]); });
  const auto out = problem.cascade(s.values);
  const double alpha = problem.config().alpha;
  const double factor = std::pow(1.0 + alpha * alpha * 4.0 * kPi * kPi, -3.0);
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  CHECK(std::abs(peak / factor - 1.0) < 0.03);
}

TEST_CASE("cascade is self-adjoint in the mass inner product") {
  for (int d : {1, 2}) {
    for (bool periodic : {true, false}) {
      const auto mesh = build_space_time_mesh(d, 6, 5, periodic);
      OuterProblem problem(mesh, boundary_constraints(mesh, gauss0, gauss1));
      const auto v = random_control(mesh, 1, 1.0), w = random_control(mesh, 2, 1.0);
      const std::span<const double> v0 = v.component(0), w0 = w.component(0);
      const double lhs = dot(multiply(problem.mass(), problem.cascade(v0)), w0);
      const double rhs = dot(multiply(problem.mass(), v0), problem.cascade(w0));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("identical end images: zero gradient and no iterations") {
  const auto mesh = build_space_time_mesh(1, 12, 12, true);
  OuterProblem problem(mesh, boundary_constraints(mesh, gauss0, gauss0));
  const NodalField zero(1, mesh.n_dofs);
  const auto state = problem.reduced_objective(zero);
  CHECK(norm2(problem.reduced_gradient(state).values) < 1e-12);
  const auto result = problem.minimize(zero);
  CHECK(result.status == MinimizeStatus::converged);
  CHECK(result.state.iteration == 0);
  CHECK(result.trace.size() == 1u);
}

TEST_CASE("pure intensity geodesic objective") {
  const auto mesh = build_space_time_mesh(1, 16, 10, true);
  OuterConfig cfg;
  cfg.sigma_inv2 = 3.0;
  OuterProblem problem(mesh, boundary_constraints(mesh, [](const Point&) { return 0.0; }, gauss1), cfg);
  const auto state = problem.reduced_objective(NodalField(1, mesh.n_dofs));
  // I = t g at the nodes; on each triangle d_t I is g at one node, so the
  // energy is the trapezoidal sum h sum g(x_i)^2.
  double energy = 0.0;
  for (int i = 0; i < 16; ++i) energy += std::pow(gauss1({i / 16.0, 0.0, 0.0}), 2) / 16.0;
  CHECK(state.matching_energy == doctest::Approx(energy).epsilon(1e-9));
  CHECK(state.objective == doctest::Approx(3.0 * energy).epsilon(1e-9));
}

TEST_CASE("stale state is rejected") {
  const auto mesh = build_space_time_mesh(1, 8, 8, true);
  OuterProblem problem(mesh, boundary_constraints(mesh, gauss0, gauss1));
  auto state = problem.reduced_objective(random_control(mesh, 3));
  state.control.values[0] += 1.0;
  CHECK_THROWS_AS((void)problem.reduced_gradient(state), StaleStateError);
}

TEST_CASE("matching gradient is linear in the penalty") {
  const auto mesh = build_space_time_mesh(1, 12, 12, true);
  const auto bc = boundary_constraints(mesh, gauss0, gauss1);
  OuterConfig a, b;
  a.sigma_inv2 = 1.0;
  b.sigma_inv2 = 250.0;
  OuterProblem pa(mesh, bc, a), pb(mesh, bc, b);
  const auto v = random_control(mesh, 4);
  const auto ga = pa.matching_gradient(pa.reduced_objective(v));
  const auto gb = pb.matching_gradient(pb.reduced_objective(v));
  for (std::size_t i = 0; i < ga.values.size(); ++i)
    CHECK(gb.values[i] == doctest::Approx(250.0 * ga.values[i]).epsilon(1e-12).scale(1e-14));
}

TEST_CASE("envelope identity: the inner sensitivity is orthogonal to the residual") {
  const auto mesh = build_space_time_mesh(1, 16, 16, true);
  const auto bc = boundary_constraints(mesh, gauss0, gauss1);
  OuterProblem problem(mesh, bc);
  const auto state = problem.reduced_objective(random_control(mesh, 5));
  const auto du = random_control(mesh, 6, 1.0);
  const double eps = 1e-6;
  auto shifted = [&](double s) {
    SpaceTimeVelocity u = state.velocity;
    for (std::size_t i = 0; i < u.u.values.size(); ++i) u.u.values[i] += s * du.values[i];
    return solve_inner(mesh, u, bc, {}, CgOptions{1e-13}).image;
  };
  const auto plus = shifted(eps), minus = shifted(-eps);
  NodalField sens(1, mesh.n_dofs);
  for (std::size_t i = 0; i < sens.values.size(); ++i) sens.values[i] = (plus.values[i] - minus.values[i]) / (2 * eps);
  const auto a = assemble_lsq_advection(mesh, state.velocity);
  const double pairing = dot(multiply(a, state.image.image.values), sens.values);
  const double scale = energy_seminorm(mesh, state.image.image, state.velocity) * energy_seminorm(mesh, sens, state.velocity);
  CHECK(std::abs(pairing) <= 1e-8 * scale);
}

TEST_CASE("gradient check on a random control") {
  const auto mesh = build_space_time_mesh(1, 16, 16, true);
  OuterProblem problem(mesh, boundary_constraints(mesh, gauss0, gauss1));
  const auto gc = check_gradient(problem, random_control(mesh, 8), 5, 1e-5, 3);
  CHECK(gc.relative_error.size() == 5u);
  CHECK(gc.max_relative_error < 1e-5);
}

TEST_CASE("descent, gradient consistency along the iterates") {
  const auto mesh = build_space_time_mesh(1, 16, 16, true);
  OuterConfig cfg;
  cfg.max_outer_iters = 10;
  OuterProblem problem(mesh, boundary_constraints(mesh, gauss0, gauss1), cfg);
  std::vector<NodalField> iterates;
  const auto result = problem.minimize(NodalField(1, mesh.n_dofs), [&](const OuterState& s, const IterationRecord&) {
    iterates.push_back(s.control);
  });
  REQUIRE(result.trace.size() >= 2u);
  for (std::size_t i = 1; i < result.trace.size(); ++i) CHECK(result.trace[i].objective <= result.trace[i - 1].objective);
  for (std::size_t i = 1; i < iterates.size(); i += 3)
    CHECK(check_gradient(problem, iterates[i], 2, 1e-5, i).max_relative_error < 1e-5);
  const auto csv = result.trace_csv();
  CHECK(csv.rfind("iter,objective,grad_norm,step_length,inner_cg_iters\n", 0) == 0);
}

TEST_CASE("2D clamped velocity stays zero on the lateral boundary") {
  const auto mesh = build_space_time_mesh(2, 16, 15, false);
  auto blob = [](double c) {
    return [c](const Point& p) { return std::exp(-50.0 * ((p[0] - c) * (p[0] - c) + (p[1] - c) * (p[1] - c))); };
  };
  OuterConfig cfg;
  cfg.max_outer_iters = 3;
  OuterProblem problem(mesh, boundary_constraints(mesh, blob(0.4), blob(0.6)), cfg);
  const auto lateral = nodes_to_dofs(mesh, mesh.lateral_nodes);
  int seen = 0;
  const auto result = problem.minimize(NodalField(2, mesh.n_dofs), [&](const OuterState& s, const IterationRecord&) {
    ++seen;
    for (int c = 0; c < 2; ++c)
      for (auto dof : lateral) CHECK(s.velocity.u.component(c)[dof] == 0.0);
  });
  CHECK(result.status != MinimizeStatus::line_search_failed);
  CHECK(seen >= 1);
  const auto frames = sample_frames(mesh, result.state.image.image);
  CHECK(frames.size() == 5u);
  CHECK(frames[0].nx == 17);
  CHECK(frames[0].values[8 * 17 + 8] == doctest::Approx(blob(0.4)({0.5, 0.5, 0.0})).epsilon(1e-12));
}

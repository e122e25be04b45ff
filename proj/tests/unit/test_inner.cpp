#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stmeta/inner.hpp"

using namespace stm;

namespace {

const double kPi = std::numbers::pi;

double bump(const Point& p) { return 1.0 + 0.5 * std::sin(2.0 * kPi * p[0]); }

} // namespace

TEST_CASE("equal end images at rest give a stationary solution") {
  for (int d : {1, 2}) {
    const auto mesh = build_space_time_mesh(d, 8, 6, true);
    const auto sol = solve_inner(mesh, zero_velocity(mesh), bump, bump, {}, CgOptions{1e-12});
    CHECK(sol.energy <= 1e-18);
    const auto g = interpolate(mesh, bump);
    double err = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) err = std::max(err, std::abs(sol.image.values[i] - g.values[i]));
    CHECK(err < 1e-10);
  }
}

TEST_CASE("zero velocity from 0 to g gives t g") {
  const auto mesh = build_space_time_mesh(1, 10, 7, true);
  const auto sol = solve_inner(mesh, zero_velocity(mesh), [](const Point&) { return 0.0; }, bump, {}, CgOptions{1e-13});
  for (std::size_t dof = 0; dof < mesh.n_dofs; ++dof) {
    const auto& p = mesh.vertices[mesh.dof_node[dof]];
    CHECK(sol.image.values[dof] == doctest::Approx(p[1] * bump(p)).epsilon(1e-9));
  }
}

TEST_CASE("Galerkin stationarity with forcing") {
  const auto mc = manufactured_case(1, 3);
  const auto mesh = build_space_time_mesh(1, 24, 24, true);
  const auto u = interpolate_velocity(mesh, mc.velocity);
  const auto bc = boundary_constraints(mesh, mc.exact_image, mc.exact_image);
  const auto sol = solve_inner(mesh, u, bc, mc.forcing, CgOptions{1e-13});
  const auto a = assemble_lsq_advection(mesh, u);
  const auto f = assemble_forcing(mesh, u, mc.forcing);
  const auto ai = multiply(a, sol.image.values);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    NodalField delta(1, mesh.n_dofs);
    for (auto& v : delta.values) v = normal(rng);
    for (const auto& [dof, value] : bc) delta.values[dof] = 0.0;
    const double lhs = dot(ai, delta.values) - dot(f, delta.values);
    CHECK(std::abs(lhs) <= 1e-8 * graph_norm(mesh, delta, u));
  }
}

TEST_CASE("minimum energy does not increase under nested refinement") {
  // Coarse boundary data is a P1 interpolant on the coarse lattice, so the
  // fine data is its trace and the coarse space embeds in the fine one.
  const int nc = 6;
  auto coarse_pl = [nc](const Point& p) {
    const double s = p[0] * nc;
    const int i = std::min(static_cast<int>(s), nc - 1);
    const double w = s - i;
    auto g = [nc](int k) { return std::cos(2.0 * kPi * k / nc) + 0.3 * (k % 2); };
    return (1 - w) * g(i) + w * g(i + 1);
  };
  auto shifted = [&](const Point& p) { return coarse_pl({std::fmod(p[0] + 1.0 / nc, 1.0), p[1], 0}); };
  const std::vector<SpaceTimeFn> vel = {[](const Point&) { return 0.25; }};
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {nc, 2 * nc, 4 * nc}) {
    const auto mesh = build_space_time_mesh(1, n, n, true);
    const auto sol = solve_inner(mesh, interpolate_velocity(mesh, vel), coarse_pl, shifted, {}, CgOptions{1e-13});
    CHECK(sol.energy <= prev * (1.0 + 1e-9));
    prev = sol.energy;
  }
}

TEST_CASE("stability constant is refinement stable") {
  for (const auto& mc : manufactured_catalog()) {
    if (!mc.smooth) continue;
    std::vector<double> c;
    for (int n : mc.dim == 1 ? std::vector<int>{8, 16, 32} : std::vector<int>{4, 8}) {
      const auto mesh = build_space_time_mesh(mc.dim, n, n, true);
      const auto u = interpolate_velocity(mesh, mc.velocity);
      const auto sol = solve_inner(mesh, u, mc.exact_image, mc.exact_image, {}, CgOptions{1e-12});
      c.push_back(graph_norm(mesh, sol.image, u) / boundary_norm(mesh, sol.image));
    }
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] <= 1.1 * c[i - 1]);
  }
}

TEST_CASE("orders and CSV layout") {
  CHECK(observed_order(10, 1e-2, 20, 2.5e-3) == doctest::Approx(2.0));
  CHECK(fitted_order({10, 20, 40}, {1e-2, 2.5e-3, 6.25e-4}) == doctest::Approx(2.0));
  const auto rep = run_convergence_study(manufactured_case(1, 1), {4, 8});
  REQUIRE(rep.levels.size() == 2u);
  CHECK(rep.all_ok());
  const auto csv = rep.to_csv();
  CHECK(csv.rfind("h_inv,l2_error,l2_order,energy_error,energy_order\n", 0) == 0);
  // First row has empty order cells.
  const auto first = csv.substr(csv.find('\n') + 1);
  CHECK(first.rfind("4,", 0) == 0);
  CHECK(first.find(",,") != std::string::npos);
}

TEST_CASE("Q1 harness on the first three levels of case 1") {
  const auto rep = run_convergence_study(manufactured_case(1, 1), {4, 16, 36});
  // Frozen from the independent tensor-product computation.
  CHECK(rep.levels[0].l2_error == doctest::Approx(1.2944e-01).epsilon(2e-4));
  CHECK(rep.levels[1].energy_error == doctest::Approx(4.4520e-01).epsilon(2e-4));
  CHECK(*rep.levels[2].energy_order == doctest::Approx(1.31).epsilon(0.01));
}

TEST_CASE("quasi-optimality with an exactly representable solution") {
  ManufacturedCase mc;
  mc.id = 99;
  mc.dim = 1;
  mc.exact_image = [](const Point&) { return 2.0; };
  mc.velocity = {[](const Point& p) { return std::sin(2.0 * kPi * p[0]); }};
  mc.forcing = [](const Point&) { return 0.0; };
  const auto q = quasi_optimality_check(mc, 8);
  CHECK(q.exact);
  CHECK(q.ratio == 1.0);
}

TEST_CASE("random smooth fields are mesh independent and the constants finite") {
  const auto a = random_smooth_fields(2, 3, 9), b = random_smooth_fields(2, 3, 9);
  const Point p{0.2, 0.7, 0.4};
  CHECK(a[1](p) == b[1](p));
  CHECK(a[0](Point{0.0, 0.3, 0.5}) == doctest::Approx(a[0](Point{1.0, 0.3, 0.5})));
  const auto mesh = build_space_time_mesh(1, 8, 8, true);
  const auto c = inequality_constants(mesh, zero_velocity(mesh), random_smooth_fields(1, 10, 1));
  CHECK(c.trace > 0.0);
  CHECK(c.poincare > 0.0);
}

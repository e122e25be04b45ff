#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "stmeta/fem.hpp"
#include "stmeta/tensor.hpp"

using namespace stm;

namespace {

double quad_form(const SparseMatrix& a, const std::vector<double>& x) {
  return dot(x, multiply(a, x));
}

} // namespace

TEST_CASE("parallel P1 assembly equals the serial reference") {
  for (int d : {1, 2}) {
    const auto mesh = build_space_time_mesh(d, 6, 5, true);
    std::vector<SpaceTimeFn> vel = {[](const Point& p) { return std::sin(6.0 * p[0]) + p[2]; },
                                    [](const Point& p) { return 0.3 * p[1]; }};
    vel.resize(static_cast<std::size_t>(d));
    const auto u = interpolate_velocity(mesh, vel);
    const auto a = assemble_lsq_advection(mesh, u);
    const auto b = assemble_lsq_advection_serial(mesh, u);
    CHECK(a.values == b.values);
    CHECK(a.col_indices == b.col_indices);
    CHECK(symmetry_defect(a) < 1e-14);
  }
}

TEST_CASE("parallel Q1 assembly equals the serial reference") {
  const std::vector<SpaceTimeFn> vel = {[](const Point& p) { return std::exp(-(0.5 - p[0]) * (0.5 - p[0])); }};
  const auto mesh = build_space_time_mesh(1, 9, 7, true);
  const auto a = assemble_lsq_advection_q1(mesh, vel);
  const auto b = assemble_lsq_advection_q1_serial(mesh, vel);
  CHECK(a.values == b.values);
  CHECK(symmetry_defect(a) < 1e-14);
}

TEST_CASE("constants lie in the kernel of the advection form") {
  for (int d : {1, 2}) {
    const auto mesh = build_space_time_mesh(d, 4, 4, true);
    std::vector<SpaceTimeFn> field = {[](const Point& p) { return 0.7 - p[0]; }, [](const Point&) { return 0.2; }};
    field.resize(static_cast<std::size_t>(d));
    const auto u = interpolate_velocity(mesh, field);
    const std::vector<double> ones(mesh.n_dofs, 1.0);
    CHECK(norm2(multiply(assemble_lsq_advection(mesh, u), ones)) < 1e-12);
    std::vector<SpaceTimeFn> vel = {[](const Point&) { return 0.4; }, [](const Point&) { return -0.1; }};
    vel.resize(static_cast<std::size_t>(d));
    CHECK(norm2(multiply(assemble_lsq_advection_q1(mesh, vel), ones)) < 1e-12);
  }
}

TEST_CASE("mass and Helmholtz matrices") {
  for (int d : {1, 2}) {
    const auto mesh = build_space_time_mesh(d, 5, 4, true);
    const auto m = assemble_mass(mesh);
    const std::vector<double> ones(mesh.n_dofs, 1.0);
    CHECK(quad_form(m, ones) == doctest::Approx(1.0).epsilon(1e-13));
    const auto h = assemble_helmholtz(mesh, 0.1);
    CHECK(quad_form(h, ones) == doctest::Approx(1.0).epsilon(1e-13)); // constants have no gradient
    CHECK(symmetry_defect(h) < 1e-14);
    // x-linear fields are not periodic; use sin for a stiffness check.
    const auto f = interpolate(mesh, [](const Point& p) { return std::sin(2.0 * std::numbers::pi * p[0]); });
    const double k = (quad_form(h, f.values) - quad_form(m, f.values)) / 0.01;
    // P1 interpolant of sin(2 pi x) on spacing h: 2 pi^2 (sin(pi h) / (pi h))^2.
    const double ph = std::numbers::pi / 5.0;
    const double expected = 2.0 * std::numbers::pi * std::numbers::pi * std::pow(std::sin(ph) / ph, 2);
    CHECK(k == doctest::Approx(expected).epsilon(1e-9));
    CHECK_THROWS_AS(assemble_helmholtz(mesh, 0.0), std::invalid_argument);
  }
}

TEST_CASE("norms of interpolated linear fields are exact") {
  const auto mesh = build_space_time_mesh(1, 8, 8, false);
  // I = x - u t is transported exactly by b = (u, 1).
  const double u0 = 0.3;
  const auto f = interpolate(mesh, [u0](const Point& p) { return p[0] - u0 * p[1]; });
  const auto u = interpolate_velocity(mesh, {[u0](const Point&) { return u0; }});
  CHECK(energy_seminorm(mesh, f, u) < 1e-13);
  CHECK(energy_error(mesh, f, {[u0](const Point&) { return u0; }}, {}) < 1e-13);
  CHECK(l2_error(mesh, f, [u0](const Point& p) { return p[0] - u0 * p[1]; }) < 1e-14);
  // ||1||_Gamma^2 = 2 (two unit faces); ||1||^2 = 1.
  const auto one = interpolate(mesh, [](const Point&) { return 1.0; });
  CHECK(boundary_norm(mesh, one) == doctest::Approx(std::sqrt(2.0)));
  CHECK(l2_norm(mesh, one) == doctest::Approx(1.0));
  CHECK(q1_l2_norm(mesh, one) == doctest::Approx(1.0));
  CHECK(graph_norm(mesh, one, u) == doctest::Approx(1.0));
}

TEST_CASE("point evaluation reproduces linear and bilinear fields") {
  const auto mesh = build_space_time_mesh(1, 6, 6, false);
  const auto lin = interpolate(mesh, [](const Point& p) { return 2.0 * p[0] - p[1] + 0.5; });
  const auto bil = interpolate(mesh, [](const Point& p) { return p[0] * p[1]; });
  for (const Point p : {Point{0.31, 0.72, 0.0}, Point{0.05, 0.99, 0.0}}) {
    CHECK(evaluate(mesh, lin, p) == doctest::Approx(2.0 * p[0] - p[1] + 0.5));
    CHECK(evaluate_q1(mesh, bil, p) == doctest::Approx(p[0] * p[1]));
  }
  CHECK_THROWS_AS(evaluate(mesh, lin, Point{1.2, 0.5, 0.0}), std::out_of_range);
}

TEST_CASE("symmetric Dirichlet elimination") {
  const auto mesh = build_space_time_mesh(1, 4, 4, true);
  const auto a = assemble_lsq_advection(mesh, zero_velocity(mesh));
  const auto bc = boundary_constraints(mesh, [](const Point& p) { return p[0]; }, [](const Point&) { return 2.0; });
  CHECK(bc.size() == 8u);
  const auto sys = apply_dirichlet(a, std::vector<double>(mesh.n_dofs, 0.0), bc);
  CHECK(symmetry_defect(sys.matrix) < 1e-15);
  for (const auto& [dof, value] : bc) {
    CHECK(sys.matrix.at(dof, dof) == 1.0);
    CHECK(sys.rhs[dof] == value);
  }
}

#include <cmath>
#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "stmeta/mesh.hpp"

using namespace stm;

TEST_CASE("cell volumes are positive and fill the unit cube") {
  for (int d : {1, 2}) {
    for (bool periodic : {false, true}) {
      const auto mesh = build_space_time_mesh(d, 5, 3, periodic);
      double total = 0.0;
      for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const double v = mesh.cell_volume(c);
        CHECK(v > 0.0);
        total += v;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(mesh.n_cells() == static_cast<std::size_t>(mesh.cells_per_cube()) * (d == 1 ? 5 : 25) * 3);
    }
  }
}

TEST_CASE("dof counts with and without periodicity") {
  const auto m1 = build_space_time_mesh(1, 6, 4, false);
  CHECK(m1.n_dofs == 7u * 5u);
  const auto p1 = build_space_time_mesh(1, 6, 4, true);
  CHECK(p1.n_dofs == 6u * 5u);
  const auto p2 = build_space_time_mesh(2, 4, 3, true);
  CHECK(p2.n_dofs == 16u * 4u);
  // Every slave dof points at a master whose coordinates differ by whole units.
  for (std::size_t v = 0; v < p2.n_vertices(); ++v) {
    const auto& a = p2.vertices[v];
    const auto& b = p2.vertices[p2.dof_node[p2.dof_map[v]]];
    for (int k = 0; k < 2; ++k) CHECK(std::abs(a[k] - b[k] - std::round(a[k] - b[k])) < 1e-14);
    CHECK(a[2] == b[2]);
  }
}

TEST_CASE("boundary tags agree with coordinates") {
  const auto mesh = build_space_time_mesh(2, 3, 4, false);
  const auto tags = classify_boundary(mesh);
  auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(tags.gamma0) == sorted(mesh.gamma0_nodes));
  CHECK(sorted(tags.gamma1) == sorted(mesh.gamma1_nodes));
  CHECK(sorted(tags.lateral) == sorted(mesh.lateral_nodes));
  CHECK(mesh.gamma0_nodes.size() == 16u);
  CHECK(mesh.gamma0_facets.size() == 9u * 2u);
}

TEST_CASE("locate and barycentric coordinates reproduce the point") {
  for (int d : {1, 2}) {
    const auto mesh = build_space_time_mesh(d, 7, 5, true);
    for (const Point p : {Point{0.13, 0.77, 0.41}, Point{0.999, 0.5, 0.0}, Point{0.0, 0.0, 1.0}}) {
      Point q = p;
      if (d == 1) q = {p[0], p[1], 0.0};
      const auto c = mesh.locate(q);
      REQUIRE(c.has_value());
      const auto lam = mesh.barycentric(*c, q);
      Point back{};
      double sum = 0.0;
      for (int a = 0; a <= mesh.dim; ++a) {
        CHECK(lam[a] > -1e-12);
        sum += lam[a];
        for (int k = 0; k < mesh.dim; ++k) back[k] += lam[a] * mesh.vertices[mesh.cells[*c][a]][k];
      }
      CHECK(sum == doctest::Approx(1.0));
      for (int k = 0; k < mesh.dim; ++k) CHECK(back[k] == doctest::Approx(q[k]).epsilon(1e-12));
    }
    CHECK_FALSE(mesh.locate(Point{1.5, 0.5, 0.5}).has_value());
  }
}

TEST_CASE("invalid mesh parameters throw") {
  CHECK_THROWS_AS(build_space_time_mesh(3, 4, 4, true), std::invalid_argument);
  CHECK_THROWS_AS(build_space_time_mesh(1, 0, 4, true), std::invalid_argument);
}

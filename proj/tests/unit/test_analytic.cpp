#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stmeta/analytic.hpp"

using namespace stm;

namespace {

const double kPi = std::numbers::pi;

double g0(const SpatialPoint& x) { return 1.0 + 0.5 * std::cos(2.0 * kPi * x[0]); }
double g1(const SpatialPoint& x) { return 0.2 + std::sin(2.0 * kPi * x[0]); }

} // namespace

TEST_CASE("zero velocity gives the linear-in-time blend") {
  const auto flow = zero_flow(1);
  for (double x : {0.1, 0.45, 0.8})
    for (double t : {0.0, 0.3, 1.0}) {
      const auto v = eulerian_solution(flow, g0, g1, {x, 0.0}, t, 100);
      CHECK(v.image == doctest::Approx((1 - t) * g0({x, 0}) + t * g1({x, 0})).epsilon(1e-12));
      CHECK(v.z == doctest::Approx(g1({x, 0}) - g0({x, 0})).epsilon(1e-12));
    }
}

TEST_CASE("constant velocity translates with periodic wrap") {
  FlowField flow;
  flow.d = 1;
  flow.velocity = [](const SpatialPoint&, double) { return SpatialPoint{0.7, 0.0}; };
  const auto traj = integrate_flow(flow, {0.6, 0.0}, 50);
  REQUIRE(traj.size() == 51u);
  CHECK(traj.back().phi[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(traj.back().det() == doctest::Approx(1.0));
  CHECK(traj.back().gamma == doctest::Approx(1.0));
  // I(x,t) along characteristics interpolates I0(x_hat) and I1(x_hat + 0.7).
  const auto v = eulerian_solution(flow, g0, g1, {0.2, 0.0}, 0.5, 200);
  CHECK(v.x_hat[0] == doctest::Approx(0.85).epsilon(1e-12));
  CHECK(v.image == doctest::Approx(0.5 * g0({0.85, 0}) + 0.5 * g1({0.55, 0})).epsilon(1e-10));
  CHECK(v.round_trip_error < 1e-12);
}

TEST_CASE("compressive flow: det and the intensity density") {
  // u = x - 0.5 on a non-periodic domain from an interior seed: phi = 0.5 + (x - 0.5) e^t.
  FlowField flow;
  flow.d = 1;
  flow.periodic = false;
  flow.velocity = [](const SpatialPoint& x, double) { return SpatialPoint{x[0] - 0.5, 0.0}; };
  flow.divergence = [](const SpatialPoint&, double) { return 1.0; };
  const auto s = streamline_solution(flow, g0, g1, {0.55, 0.0}, 400);
  const auto& end = s.trajectory.back();
  CHECK(end.phi[0] == doctest::Approx(0.5 + 0.05 * std::exp(1.0)).epsilon(1e-10));
  CHECK(end.det() == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  CHECK(end.gamma == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));
  CHECK(s.samples.back().image == doctest::Approx(g1(end.phi)).epsilon(1e-12));
  CHECK(s.samples.front().image == doctest::Approx(g0({0.55, 0})).epsilon(1e-12));
  // A seed that leaves the domain throws.
  CHECK_THROWS_AS(integrate_flow(flow, {0.95, 0.0}, 100), FlowError);
}

TEST_CASE("catalog forcing equals the material derivative of the exact image") {
  const double eps = 1e-6;
  for (const auto& mc : manufactured_catalog()) {
    for (const Point p : {Point{0.3, 0.4, 0.6}, Point{0.71, 0.25, 0.35}}) {
      Point q = p;
      if (mc.dim == 1) q = {p[0], p[1], 0.0};
      if (!mc.smooth) continue;
      // Central differences of I along b = (u, 1).
      Point fwd = q, bwd = q;
      fwd[mc.dim] += eps;
      bwd[mc.dim] -= eps;
      for (int k = 0; k < mc.dim; ++k) {
        const double uk = mc.velocity[static_cast<std::size_t>(k)](q);
        fwd[k] += eps * uk;
        bwd[k] -= eps * uk;
      }
      const double md = (mc.exact_image(fwd) - mc.exact_image(bwd)) / (2 * eps);
      const double f = mc.forcing ? mc.forcing(q) : 0.0;
      CHECK(md == doctest::Approx(f).epsilon(1e-6).scale(1.0));
      if (mc.pure_transport) CHECK(std::abs(f) < 1e-12);
    }
  }
}

TEST_CASE("catalog lookup") {
  CHECK(manufactured_catalog().size() == 7u);
  CHECK(manufactured_case(2, 1).dim == 2);
  CHECK_THROWS_AS(manufactured_case(1, 4), std::out_of_range);
  CHECK_THROWS_AS(manufactured_case(3, 0), std::out_of_range);
  // Periodized profiles agree across the seam.
  for (const auto& mc : manufactured_catalog()) {
    if (mc.dim != 1 || !mc.smooth) continue;
    for (double t : {0.0, 0.5, 1.0}) CHECK(mc.exact_image({0.0, t, 0}) == doctest::Approx(mc.exact_image({1.0, t, 0})));
  }
}

TEST_CASE("conservation of the inverse Jacobian integral") {
  for (const auto& mc : manufactured_catalog()) {
    const auto rep = conservation_check(mc.flow(), mc.dim == 1 ? 128 : 16, 400);
    CHECK(rep.max_drift < 1e-8);
    CHECK(rep.times.size() == 11u);
  }
}

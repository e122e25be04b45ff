#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmeta/fem.hpp"

namespace stm {

/// Spatial point (d <= 2 entries used).
using SpatialPoint = std::array<double, 2>;

/// Velocity field for Lagrangian integration.
struct FlowField {
  int d = 1;
  bool periodic = true;
  std::function<SpatialPoint(const SpatialPoint&, double)> velocity;
  /// Spatial divergence; when empty it is approximated by central
  /// differences with step 1e-6.
  std::function<double(const SpatialPoint&, double)> divergence;

  [[nodiscard]] SpatialPoint eval(const SpatialPoint& x, double t) const;
  [[nodiscard]] double div(const SpatialPoint& x, double t) const;
};

FlowField zero_flow(int d);

/// Spatial image on one time slice.
using ImageFn = std::function<double(const SpatialPoint&)>;

/// A trajectory leaves a non-periodic domain, or the integration produced a
/// non-finite state.
class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lagrangian state at time t along the streamline seeded at x_hat.
struct FlowState {
  SpatialPoint x_hat{};
  double t = 0.0;
  SpatialPoint phi{};   // wrapped into [0,1)^d for periodic flows
  double log_det = 0.0; // log of the Jacobian determinant
  double gamma = 0.0;   // integral of 1/det over [0, t]

  [[nodiscard]] double det() const;
};

/// Classical RK4 on (phi, log det, gamma) from t = 0 to t = 1 with `steps`
/// uniform steps; returns steps + 1 states.
std::vector<FlowState> integrate_flow(const FlowField& u, const SpatialPoint& x_hat, int steps);

/// Single integration of the same system from (x, t0) to t1 (t1 < t0
/// allowed), with `steps` uniform steps. `x_hat` of the result is `x`, and
/// log_det / gamma are accumulated from t0.
FlowState integrate_flow_between(const FlowField& u, const SpatialPoint& x, double t0, double t1,
                                 int steps);

/// Closed-form geodesic along one streamline.
struct StreamlineSample {
  double t = 0.0;
  double image = 0.0;   // I~(x_hat, t)
  double z = 0.0;       // lambda * det^{-1} along the streamline
  double d_image = 0.0; // lambda * det^{-1}, the exact time derivative of I~
};

struct StreamlineSolution {
  std::vector<FlowState> trajectory;
  double lambda = 0.0;
  std::vector<StreamlineSample> samples; // one per trajectory state
};

StreamlineSolution streamline_solution(const FlowField& u, const ImageFn& i0, const ImageFn& i1,
                                       const SpatialPoint& x_hat, int steps);

struct EulerianValue {
  double image = 0.0;
  double z = 0.0;
  SpatialPoint x_hat{};
  double round_trip_error = 0.0;
};

/// I(x, t) and z(x, t): backward integration to the seed x_hat, forward
/// integration back to (x, t) and on to t = 1. `steps` is the number of
/// steps per unit time. Throws FlowError if the round trip misses x by more
/// than `round_trip_tol`.
EulerianValue eulerian_solution(const FlowField& u, const ImageFn& i0, const ImageFn& i1,
                                const SpatialPoint& x, double t, int steps,
                                double round_trip_tol = 1e-8);

struct ConservationReport {
  double max_drift = 0.0;
  std::vector<double> times;
  std::vector<double> integrals;
};

/// Integral of 1/det over each time slice t = 0, 0.1, ..., 1, computed by
/// pushing a uniform midpoint rule on gamma0 through the flow and evaluating
/// 1/det at the image points by independent backward integration.
ConservationReport conservation_check(const FlowField& u, int n_seeds, int steps);

/// Periodic distance (or plain distance) between two spatial points.
double flow_distance(const FlowField& u, const SpatialPoint& a, const SpatialPoint& b);

// ---------------------------------------------------------------------------
// Manufactured solutions.

/// How the tabulated profiles are made periodic in space.
enum class SeamTreatment {
  /// Translating profiles are summed over periodic images; the one
  /// non-translating profile gets a linear-in-x correction.
  periodized,
  /// Profiles as tabulated, discontinuous across x = 0 ~ 1.
  verbatim,
};

struct ManufacturedCase {
  int id = 0;
  int dim = 1; // spatial dimension
  std::string description;
  SpaceTimeFn exact_image;
  std::vector<SpaceTimeFn> velocity;
  SpaceTimeFn velocity_divergence;
  /// b . grad_t I for the exact image and exact velocity.
  SpaceTimeFn forcing;
  bool periodic = true;
  bool smooth = true;
  /// True when forcing is identically zero (pure transport).
  bool pure_transport = true;

  [[nodiscard]] FlowField flow() const;
  [[nodiscard]] ImageFn trace(double t) const;
};

/// All seven cases: d = 1 ids 0-3, d = 2 ids 0-2.
std::vector<ManufacturedCase> manufactured_catalog(SeamTreatment seam = SeamTreatment::periodized);

/// Throws std::out_of_range naming the valid ids for unknown (dim, id).
ManufacturedCase manufactured_case(int dim, int id,
                                   SeamTreatment seam = SeamTreatment::periodized);

} // namespace stm

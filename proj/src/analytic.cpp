#include "stmeta/analytic.hpp"

#include <algorithm>
#include <cmath>

namespace stm {

namespace {

constexpr double kDomainTol = 1e-12;
constexpr double kDivStep = 1e-6;

struct OdeState {
  SpatialPoint p{};
  double log_det = 0.0;
  double gamma = 0.0;
};

SpatialPoint wrap(const FlowField& u, SpatialPoint p) {
  if (u.periodic) {
    for (int k = 0; k < u.d; ++k) p[k] -= std::floor(p[k]);
  }
  return p;
}

OdeState rhs(const FlowField& u, const OdeState& s, double t) {
  const SpatialPoint x = wrap(u, s.p);
  OdeState out;
  out.p = u.eval(x, t);
  out.log_det = u.div(x, t);
  out.gamma = std::exp(-s.log_det);
  return out;
}

OdeState axpy(const OdeState& s, double h, const OdeState& k) {
  OdeState out = s;
  out.p[0] += h * k.p[0];
  out.p[1] += h * k.p[1];
  out.log_det += h * k.log_det;
  out.gamma += h * k.gamma;
  return out;
}

void check_state(const FlowField& u, const OdeState& s) {
  for (int k = 0; k < u.d; ++k) {
    if (!std::isfinite(s.p[k])) throw FlowError("flow integration produced a non-finite position");
    if (!u.periodic && (s.p[k] < -kDomainTol || s.p[k] > 1.0 + kDomainTol)) {
      throw FlowError("streamline left the non-periodic domain");
    }
  }
  if (!std::isfinite(s.log_det) || !std::isfinite(s.gamma)) {
    throw FlowError("Jacobian determinant degenerated during flow integration");
  }
}

OdeState rk4_step(const FlowField& u, const OdeState& s, double t, double h) {
  const OdeState k1 = rhs(u, s, t);
  const OdeState k2 = rhs(u, axpy(s, 0.5 * h, k1), t + 0.5 * h);
  const OdeState k3 = rhs(u, axpy(s, 0.5 * h, k2), t + 0.5 * h);
  const OdeState k4 = rhs(u, axpy(s, h, k3), t + h);
  OdeState out = s;
  for (int k = 0; k < 2; ++k) out.p[k] += h / 6.0 * (k1.p[k] + 2.0 * k2.p[k] + 2.0 * k3.p[k] + k4.p[k]);
  out.log_det += h / 6.0 * (k1.log_det + 2.0 * k2.log_det + 2.0 * k3.log_det + k4.log_det);
  out.gamma += h / 6.0 * (k1.gamma + 2.0 * k2.gamma + 2.0 * k3.gamma + k4.gamma);
  check_state(u, out);
  return out;
}

FlowState to_flow_state(const FlowField& u, const SpatialPoint& x_hat, double t, const OdeState& s) {
  FlowState st;
  st.x_hat = x_hat;
  st.t = t;
  st.phi = wrap(u, s.p);
  if (!u.periodic) {
    for (int k = 0; k < u.d; ++k) st.phi[k] = std::clamp(st.phi[k], 0.0, 1.0);
  }
  st.log_det = s.log_det;
  st.gamma = s.gamma;
  return st;
}

} // namespace

SpatialPoint FlowField::eval(const SpatialPoint& x, double t) const { return velocity(x, t); }

double FlowField::div(const SpatialPoint& x, double t) const {
  if (divergence) return divergence(x, t);
  double sum = 0.0;
  for (int k = 0; k < d; ++k) {
    SpatialPoint xp = x, xm = x;
    xp[k] += kDivStep;
    xm[k] -= kDivStep;
    sum += (velocity(xp, t)[k] - velocity(xm, t)[k]) / (2.0 * kDivStep);
  }
  return sum;
}

FlowField zero_flow(int d) {
  FlowField u;
  u.d = d;
  u.periodic = true;
  u.velocity = [](const SpatialPoint&, double) { return SpatialPoint{0.0, 0.0}; };
  u.divergence = [](const SpatialPoint&, double) { return 0.0; };
  return u;
}

double FlowState::det() const { return std::exp(log_det); }

double flow_distance(const FlowField& u, const SpatialPoint& a, const SpatialPoint& b) {
  double sum = 0.0;
  for (int k = 0; k < u.d; ++k) {
    double diff = std::abs(a[k] - b[k]);
    if (u.periodic) diff = std::min(diff, 1.0 - diff);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

std::vector<FlowState> integrate_flow(const FlowField& u, const SpatialPoint& x_hat, int steps) {
  if (steps < 1) throw std::invalid_argument("integrate_flow: steps must be >= 1");
  std::vector<FlowState> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  OdeState s;
  s.p = x_hat;
  check_state(u, s);
  trajectory.push_back(to_flow_state(u, x_hat, 0.0, s));
  const double h = 1.0 / steps;
  for (int n = 0; n < steps; ++n) {
    s = rk4_step(u, s, n * h, h);
    trajectory.push_back(to_flow_state(u, x_hat, n + 1 == steps ? 1.0 : (n + 1) * h, s));
  }
  return trajectory;
}

FlowState integrate_flow_between(const FlowField& u, const SpatialPoint& x, double t0, double t1,
                                 int steps) {
  OdeState s;
  s.p = x;
  check_state(u, s);
  if (steps > 0 && t1 != t0) {
    const double h = (t1 - t0) / steps;
    for (int n = 0; n < steps; ++n) s = rk4_step(u, s, t0 + n * h, h);
  }
  return to_flow_state(u, x, t1, s);
}

StreamlineSolution streamline_solution(const FlowField& u, const ImageFn& i0, const ImageFn& i1,
                                       const SpatialPoint& x_hat, int steps) {
  StreamlineSolution sol;
  sol.trajectory = integrate_flow(u, x_hat, steps);
  const FlowState& end = sol.trajectory.back();
  const double jump = i1(end.phi) - i0(x_hat);
  const double gamma1 = end.gamma;
  sol.lambda = jump / gamma1;
  const double base = i0(x_hat);
  sol.samples.reserve(sol.trajectory.size());
  for (const auto& st : sol.trajectory) {
    StreamlineSample sample;
    sample.t = st.t;
    sample.image = st.gamma / gamma1 * jump + base;
    sample.z = sol.lambda * std::exp(-st.log_det);
    sample.d_image = sample.z;
    sol.samples.push_back(sample);
  }
  return sol;
}

EulerianValue eulerian_solution(const FlowField& u, const ImageFn& i0, const ImageFn& i1,
                                const SpatialPoint& x, double t, int steps, double round_trip_tol) {
  const int n_back = t > 0.0 ? std::max(1, static_cast<int>(std::lround(steps * t))) : 0;
  const int n_rest = t < 1.0 ? std::max(1, steps - n_back) : 0;

  EulerianValue out;
  out.x_hat = n_back > 0 ? integrate_flow_between(u, x, t, 0.0, n_back).phi : x;
  const FlowState fwd = integrate_flow_between(u, out.x_hat, 0.0, t, n_back);
  out.round_trip_error = flow_distance(u, fwd.phi, x);
  if (out.round_trip_error > round_trip_tol) {
    throw FlowError("eulerian_solution: backward/forward round trip missed the query point by " +
                    std::to_string(out.round_trip_error));
  }
  const FlowState rest = integrate_flow_between(u, fwd.phi, t, 1.0, n_rest);
  const double gamma_t = fwd.gamma;
  const double gamma_1 = gamma_t + std::exp(-fwd.log_det) * rest.gamma;
  const double jump = i1(rest.phi) - i0(out.x_hat);
  const double lambda = jump / gamma_1;
  out.image = gamma_t / gamma_1 * jump + i0(out.x_hat);
  out.z = lambda * std::exp(-fwd.log_det);
  return out;
}

ConservationReport conservation_check(const FlowField& u, int n_seeds, int steps) {
  if (n_seeds < 1 || steps < 1) throw std::invalid_argument("conservation_check: need seeds and steps");
  constexpr int kSlices = 10;
  std::vector<SpatialPoint> seeds;
  for (int j = 0; j < (u.d == 2 ? n_seeds : 1); ++j) {
    for (int i = 0; i < n_seeds; ++i) {
      seeds.push_back({(i + 0.5) / n_seeds, u.d == 2 ? (j + 0.5) / n_seeds : 0.0});
    }
  }
  const double weight = 1.0 / static_cast<double>(seeds.size());

  std::vector<std::array<double, kSlices + 1>> contrib(seeds.size());
  const auto ns = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < ns; ++si) {
    const auto s = static_cast<std::size_t>(si);
    const auto traj = integrate_flow(u, seeds[s], steps);
    for (int m = 0; m <= kSlices; ++m) {
      const int k = static_cast<int>(std::lround(static_cast<double>(m) * steps / kSlices));
      const FlowState& st = traj[static_cast<std::size_t>(k)];
      // 1/det at phi_t(x_hat), from the inverse flow.
      const FlowState back = integrate_flow_between(u, st.phi, st.t, 0.0, k);
      contrib[s][static_cast<std::size_t>(m)] = std::exp(back.log_det) * st.det();
    }
  }

  ConservationReport report;
  for (int m = 0; m <= kSlices; ++m) {
    double total = 0.0;
    for (const auto& c : contrib) total += weight * c[static_cast<std::size_t>(m)];
    report.times.push_back(static_cast<double>(m) / kSlices);
    report.integrals.push_back(total);
  }
  for (double v : report.integrals) {
    report.max_drift = std::max(report.max_drift, std::abs(v - report.integrals.front()));
  }
  return report;
}

} // namespace stm

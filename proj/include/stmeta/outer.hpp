#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stmeta/inner.hpp"

namespace stm {

struct OuterConfig {
  double sigma_inv2 = 1.0;
  /// Helmholtz length scale; not given by the method, 0.1 is our default.
  double alpha = 0.1;
  GradMode grad_mode = GradMode::spatial;
  int max_outer_iters = 200;
  /// Stop when ||grad|| <= grad_tol_rel * ||grad_0|| or <= grad_tol_abs.
  double grad_tol_rel = 1e-6;
  double grad_tol_abs = 1e-12;
  int lbfgs_memory = 10;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  int max_backtracks = 30;
  double inner_tol = 1e-12;
  double helmholtz_tol = 1e-13;
};

struct OuterState {
  NodalField control;           // v0, d components
  SpaceTimeVelocity velocity;   // S v0
  InnerSolution image;          // I*[u]
  double regularization = 0.0;  // 1/2 sum_k v0_k^T M v0_k
  double matching_energy = 0.0; // ||b . grad_t I*||^2
  double objective = 0.0;       // regularization + sigma_inv2 * matching_energy
  double gradient_norm = -1.0;  // < 0 until a gradient has been taken
  int iteration = 0;
  /// Control values `velocity` was derived from; reduced_gradient refuses a
  /// state whose control has since been modified.
  std::vector<double> derived_from;
};

/// reduced_gradient was given a state whose velocity no longer matches its
/// control.
class StaleStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class MinimizeStatus { converged, max_iterations, line_search_failed };

const char* to_string(MinimizeStatus status);

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step_length = 0.0;
  std::size_t inner_cg_iters = 0;
  double matching_energy = 0.0;
};

struct MinimizeResult {
  OuterState state; // last accepted state
  std::vector<IterationRecord> trace;
  MinimizeStatus status = MinimizeStatus::max_iterations;
  std::string message;

  /// `iter,objective,grad_norm,step_length,inner_cg_iters`
  [[nodiscard]] std::string trace_csv() const;
};

/// Reduced outer problem on a fixed mesh and fixed gamma data. Mass and
/// Helmholtz matrices are assembled once. On a non-periodic mesh the
/// velocity is clamped to zero on lateral dofs at every cascade stage.
class OuterProblem {
 public:
  OuterProblem(const SimplexMesh& mesh, std::map<std::size_t, double> boundary, OuterConfig config = {});

  [[nodiscard]] const SimplexMesh& mesh() const { return *mesh_; }
  [[nodiscard]] const OuterConfig& config() const { return config_; }
  [[nodiscard]] const SparseMatrix& mass() const { return mass_; }
  [[nodiscard]] const std::vector<std::size_t>& clamped_dofs() const { return clamped_; }

  /// One scalar component through S = (A_H^{-1} M)^3.
  [[nodiscard]] std::vector<double> cascade(std::span<const double> v) const;
  /// One scalar component through S^T = (M A_H^{-1})^3.
  [[nodiscard]] std::vector<double> cascade_transpose(std::span<const double> g) const;

  [[nodiscard]] SpaceTimeVelocity smooth_control(const NodalField& v0) const;

  /// Objective and state at v0. `warm`, when given, warm-starts the inner CG.
  [[nodiscard]] OuterState reduced_objective(const NodalField& v0, const OuterState* warm = nullptr) const;

  /// g_u[k][i] = 2 sigma_inv2 int (b . grad_t I)(phi_i d_k I), d components.
  [[nodiscard]] NodalField matching_gradient(const OuterState& state) const;

  /// M v0 + (M A_H^{-1})^3 g_u per component.
  [[nodiscard]] NodalField reduced_gradient(const OuterState& state) const;

  using Observer = std::function<void(const OuterState&, const IterationRecord&)>;

  /// L-BFGS with Armijo backtracking. The first step and every restart use
  /// the normalized steepest-descent direction; a failed quasi-Newton line
  /// search is retried once along steepest descent before giving up.
  [[nodiscard]] MinimizeResult minimize(const NodalField& v0_init, const Observer& observer = {}) const;

 private:
  std::vector<double> helmholtz_solve(std::vector<double> rhs) const;

  const SimplexMesh* mesh_;
  std::map<std::size_t, double> boundary_;
  OuterConfig config_;
  SparseMatrix mass_;
  SparseMatrix helmholtz_; // with clamped rows/columns eliminated
  std::vector<std::size_t> clamped_;
};

struct GradientCheck {
  std::vector<double> directional; // <grad, d>
  std::vector<double> finite_difference;
  std::vector<double> relative_error;
  double max_relative_error = 0.0;
};

/// Central differences of the reduced objective along `n_directions`
/// random unit directions (fixed seed).
GradientCheck check_gradient(const OuterProblem& problem, const NodalField& v0, int n_directions = 5,
                             double step = 1e-5, std::uint64_t seed = 1);

/// Image values on the spatial lattice at time t; x fastest.
struct ImageFrame {
  double t = 0.0;
  int nx = 0;
  int ny = 1;
  std::vector<double> values;
};

std::vector<ImageFrame> sample_frames(const SimplexMesh& mesh, const NodalField& image,
                                      const std::vector<double>& times = {0.0, 0.25, 0.5, 0.75, 1.0});

} // namespace stm

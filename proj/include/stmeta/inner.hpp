#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmeta/analytic.hpp"
#include "stmeta/fem.hpp"
#include "stmeta/tensor.hpp"

namespace stm {

/// Result of the discrete least-squares advection solve.
struct InnerSolution {
  NodalField image;
  /// || b_h . grad_t I_h - f ||^2 (f = 0 without forcing).
  double energy = 0.0;
  CgReport cg;
};

/// The inner linear solve did not converge.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, CgReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  [[nodiscard]] const CgReport& report() const { return report_; }

 private:
  CgReport report_;
};

/// Minimizes || b_h . grad_t I - f ||^2 over P1 fields with the given dof
/// values on gamma0 / gamma1. `initial_guess`, when non-empty, warm-starts CG.
InnerSolution solve_inner(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                          const std::map<std::size_t, double>& boundary,
                          const SpaceTimeFn& forcing = {}, const CgOptions& cg = {},
                          std::span<const double> initial_guess = {});

/// The same problem with tensor-product Q1 elements on the mesh lattice and
/// the velocity evaluated pointwise.
InnerSolution solve_inner_q1(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity,
                             const std::map<std::size_t, double>& boundary,
                             const SpaceTimeFn& forcing = {}, const CgOptions& cg = {});

/// Same, with boundary data interpolated from I0 (t = 0) and I1 (t = 1).
InnerSolution solve_inner(const SimplexMesh& mesh, const SpaceTimeVelocity& u, const SpaceTimeFn& i0,
                          const SpaceTimeFn& i1, const SpaceTimeFn& forcing = {},
                          const CgOptions& cg = {});

struct ConvergenceLevel {
  int h_inverse = 0;
  double l2_error = 0.0;
  std::optional<double> l2_order;
  double energy_error = 0.0;
  std::optional<double> energy_order;
  std::size_t cg_iterations = 0;
  bool ok = true;
  std::string failure;
};

struct ConvergenceReport {
  int dim = 1;
  int case_id = 0;
  std::vector<ConvergenceLevel> levels;

  /// `h_inv,l2_error,l2_order,energy_error,energy_order`, errors with four
  /// significant digits, orders with two decimals, blank on the first row.
  [[nodiscard]] std::string to_csv() const;
  [[nodiscard]] bool all_ok() const;
};

enum class ElementFamily { simplex_p1, tensor_q1 };

/// What the discrete solution is compared with.
enum class ErrorReference {
  /// Nodal interpolant of the exact solution in the same finite element space.
  interpolant,
  /// The exact solution itself (degree-5 quadrature).
  exact,
};

struct ConvergenceOptions {
  /// Time subdivisions per level; 0 means n_time = h_inverse.
  int n_time = 0;
  bool periodic = true;
  ElementFamily element = ElementFamily::tensor_q1;
  ErrorReference reference = ErrorReference::interpolant;
  CgOptions cg{1e-12};
};

/// log(e_prev / e) / log(h_prev / h), the order between consecutive levels.
double observed_order(double h_inv_prev, double e_prev, double h_inv, double e);

/// Least-squares slope of -log(e) against log(h^{-1}).
double fitted_order(const std::vector<double>& h_inverses, const std::vector<double>& errors);

/// Solves the case on a periodic mesh per level and measures the L2 and
/// energy errors. A level that fails is recorded (ok = false) and skipped
/// for orders.
ConvergenceReport run_convergence_study(const ManufacturedCase& mc, const std::vector<int>& h_inverses,
                                        const ConvergenceOptions& options = {});

struct QuasiOptimality {
  double discrete_error = 0.0;      // || I - I_h ||_E
  double interpolation_error = 0.0; // || I - Pi_h I ||_E
  double ratio = 0.0;
  bool exact = false; // both errors vanish
};

/// Energy errors of the P1 solution and of the P1 interpolant, both against
/// the exact solution.
QuasiOptimality quasi_optimality_check(const ManufacturedCase& mc, int h_inverse,
                                       const ConvergenceOptions& options = {});

/// Random smooth space-time functions: low Fourier modes in space times
/// quadratics in t, Gaussian coefficients damped with frequency. The same
/// seed gives the same functions on every mesh.
std::vector<SpaceTimeFn> random_smooth_fields(int dim, int count, std::uint64_t seed);

/// Suprema over the given fields (as P1 interpolants) of
///   trace:    ||I||_Gamma^2 / ||I||_G^2
///   poincare: ||I||^2 / (||I||_Gamma^2 + ||b . grad_t I||^2).
struct InequalityConstants {
  double trace = 0.0;
  double poincare = 0.0;
};

InequalityConstants inequality_constants(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                                         const std::vector<SpaceTimeFn>& fields);

} // namespace stm

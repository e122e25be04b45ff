#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stm {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Square matrix in compressed row storage. Column indices are sorted within
/// each row and unique.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  [[nodiscard]] std::size_t nnz() const { return values.size(); }
  /// Entry (i, j), zero when not stored.
  [[nodiscard]] double at(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::vector<double> diagonal() const;
};

/// Sums duplicate (row, col) pairs. The result is bitwise independent of the
/// order of `triplets`. Throws std::out_of_range for indices >= n.
SparseMatrix assemble_from_triplets(std::size_t n, std::vector<Triplet> triplets);

/// y = A x, rows distributed over OpenMP threads. Each row is summed in
/// storage order, so the result equals `multiply_serial` bit for bit.
void multiply(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
/// Serial reference for `multiply`.
void multiply_serial(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

std::vector<double> multiply(const SparseMatrix& a, std::span<const double> x);

/// Dot product with an OpenMP reduction. Agrees with `dot_serial` to
/// round-off; bitwise only with one thread.
double dot(std::span<const double> x, std::span<const double> y);
double dot_serial(std::span<const double> x, std::span<const double> y);

double norm2(std::span<const double> x);

/// max |A_ij - A_ji| / max |A_ij|.
double symmetry_defect(const SparseMatrix& a);

enum class Preconditioner { none, jacobi };

struct CgOptions {
  double tol_rel = 1e-10;
  /// 0 means 20 * n.
  std::size_t max_iter = 0;
  Preconditioner precond = Preconditioner::jacobi;
  /// Record the residual norm of every iteration in the report.
  bool record_history = false;
};

struct CgReport {
  std::size_t iterations = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
  /// NaN or Inf showed up in the iteration.
  bool breakdown = false;
  std::vector<double> residual_history;
};

struct CgResult {
  std::vector<double> x;
  CgReport report;
};

/// Preconditioned conjugate gradients for symmetric positive definite `a`.
/// Never throws on non-convergence; inspect the report instead.
CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> x0 = {});

} // namespace stm

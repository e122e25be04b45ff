#include "stmeta/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stm {

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
  const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_indices.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> diag(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = at(i, i);
  return diag;
}

SparseMatrix assemble_from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) {
      throw std::out_of_range("assemble_from_triplets: index (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") out of range for n = " +
                              std::to_string(n));
    }
  }
  // Sorting on the value as well fixes the summation order of duplicates.
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.value < b.value;
  });

  SparseMatrix m;
  m.n = n;
  m.row_offsets.assign(n + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const std::size_t row = triplets[k].row;
    const std::size_t col = triplets[k].col;
    double sum = 0.0;
    while (k < triplets.size() && triplets[k].row == row && triplets[k].col == col) {
      sum += triplets[k].value;
      ++k;
    }
    m.col_indices.push_back(col);
    m.values.push_back(sum);
    ++m.row_offsets[row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_offsets[i + 1] += m.row_offsets[i];
  return m;
}

void multiply_serial(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < a.n; ++i) {
    double sum = 0.0;
    for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      sum += a.values[k] * x[a.col_indices[k]];
    }
    y[i] = sum;
  }
}

void multiply(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(a.n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      sum += a.values[k] * x[a.col_indices[k]];
    }
    y[i] = sum;
  }
}

std::vector<double> multiply(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.n, 0.0);
  multiply(a, x, y);
  return y;
}

double dot_serial(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  double sum = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : sum)
  for (std::ptrdiff_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double symmetry_defect(const SparseMatrix& a) {
  double scale = 0.0;
  double defect = 0.0;
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
      scale = std::max(scale, std::abs(a.values[k]));
      defect = std::max(defect, std::abs(a.values[k] - a.at(a.col_indices[k], i)));
    }
  }
  return scale > 0.0 ? defect / scale : 0.0;
}

CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options,
                  std::span<const double> x0) {
  const std::size_t n = a.n;
  if (b.size() != n) throw std::invalid_argument("cg_solve: right-hand side size mismatch");
  const std::size_t max_iter = options.max_iter > 0 ? options.max_iter : 20 * std::max<std::size_t>(n, 1);

  CgResult result;
  auto& x = result.x;
  auto& report = result.report;
  x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), x.begin());

  const double b_norm = norm2(b);
  if (!std::isfinite(b_norm)) {
    report.breakdown = true;
    return result;
  }
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    report.converged = true;
    return result;
  }

  std::vector<double> inv_diag(n, 1.0);
  if (options.precond == Preconditioner::jacobi) {
    const auto diag = a.diagonal();
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  const auto ni = static_cast<std::ptrdiff_t>(n);
  auto true_residual = [&] {
    multiply(a, x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    return norm2(r);
  };

  // The recursive residual can drift below the true one at tight
  // tolerances; restarting from the current iterate recovers it.
  constexpr int kMaxRestarts = 3;
  double r_norm = true_residual();
  if (options.record_history) report.residual_history.push_back(r_norm / b_norm);
  for (int restart = 0; restart <= kMaxRestarts; ++restart) {
    if (r_norm <= options.tol_rel * b_norm || report.iterations >= max_iter) break;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (report.iterations < max_iter) {
      multiply(a, p, q);
      const double pq = dot(p, q);
      if (!std::isfinite(pq) || pq <= 0.0) {
        report.breakdown = !std::isfinite(pq);
        break;
      }
      const double alpha = rz / pq;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < ni; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      ++report.iterations;
      r_norm = norm2(r);
      if (options.record_history) report.residual_history.push_back(r_norm / b_norm);
      if (!std::isfinite(r_norm)) {
        report.breakdown = true;
        break;
      }
      if (r_norm <= options.tol_rel * b_norm) break;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < ni; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < ni; ++i) p[i] = z[i] + beta * p[i];
    }
    if (report.breakdown) break;
    r_norm = true_residual();
  }

  report.final_relative_residual = r_norm / b_norm;
  report.converged = !report.breakdown && std::isfinite(r_norm) &&
                     report.final_relative_residual <= options.tol_rel;
  return result;
}

} // namespace stm

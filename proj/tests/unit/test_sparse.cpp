#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "stmeta/sparse.hpp"

using namespace stm;

namespace {

// 1D Dirichlet Laplacian plus a shift, tridiagonal.
SparseMatrix laplacian(std::size_t n, double shift) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0 + shift});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return assemble_from_triplets(n, t);
}

// Thomas algorithm, the oracle for the tridiagonal solves.
std::vector<double> thomas(std::size_t n, double shift, std::vector<double> rhs) {
  std::vector<double> c(n, 0.0);
  double diag = 2.0 + shift;
  c[0] = -1.0 / diag;
  rhs[0] /= diag;
  for (std::size_t i = 1; i < n; ++i) {
    const double m = 2.0 + shift + c[i - 1];
    c[i] = -1.0 / m;
    rhs[i] = (rhs[i] + rhs[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

} // namespace

TEST_CASE("triplet assembly sums duplicates independent of order") {
  std::vector<Triplet> t = {{0, 0, 1.0}, {1, 2, 0.5}, {0, 0, 2.0}, {2, 1, -1.0}, {1, 2, 0.25}};
  const auto a = assemble_from_triplets(3, t);
  std::reverse(t.begin(), t.end());
  const auto b = assemble_from_triplets(3, t);
  CHECK(a.at(0, 0) == 3.0);
  CHECK(a.at(1, 2) == 0.75);
  CHECK(a.at(2, 2) == 0.0);
  CHECK(a.values == b.values);
  CHECK(a.col_indices == b.col_indices);
  CHECK_THROWS_AS(assemble_from_triplets(2, {{2, 0, 1.0}}), std::out_of_range);
}

TEST_CASE("parallel kernels agree with the serial references") {
  const auto a = laplacian(5000, 0.1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> x(a.n), y(a.n), z(a.n);
  for (auto& v : x) v = uni(rng);
  multiply(a, x, y);
  multiply_serial(a, x, z);
  CHECK(y == z);
  CHECK(dot(x, y) == doctest::Approx(dot_serial(x, y)).epsilon(1e-13));
  CHECK(symmetry_defect(a) == 0.0);
}

TEST_CASE("CG matches the tridiagonal oracle") {
  const std::size_t n = 200;
  for (double shift : {0.0, 0.5}) {
    const auto a = laplacian(n, shift);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = std::sin(0.1 * static_cast<double>(i)) + 0.3;
    CgOptions opt;
    opt.tol_rel = 1e-11;
    opt.record_history = true;
    const auto res = cg_solve(a, b, opt);
    CHECK(res.report.converged);
    CHECK(res.report.residual_history.size() == res.report.iterations + 1);
    const auto ref = thomas(n, shift, b);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(res.x[i] - ref[i]));
      scale = std::max(scale, std::abs(ref[i]));
    }
    CHECK(err <= 1e-9 * scale);
  }
}

TEST_CASE("CG reports non-convergence without throwing") {
  const auto a = laplacian(400, 0.0);
  std::vector<double> b(400, 1.0);
  CgOptions opt;
  opt.max_iter = 5;
  const auto res = cg_solve(a, b, opt);
  CHECK_FALSE(res.report.converged);
  CHECK(res.report.iterations == 5u);
  // A zero right-hand side converges immediately.
  const auto zero = cg_solve(a, std::vector<double>(400, 0.0));
  CHECK(zero.report.converged);
  CHECK(norm2(zero.x) == 0.0);
}

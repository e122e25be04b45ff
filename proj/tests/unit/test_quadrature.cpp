#include <cmath>

#include "doctest.h"
#include "stmeta/quadrature.hpp"

using namespace stm;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

// Integral over the unit simplex of prod lambda_a^{k_a}, as a fraction of its
// volume: dim! prod k_a! / (dim + sum k)!.
double monomial_fraction(int dim, const std::array<int, 4>& k) {
  double num = factorial(dim);
  int total = 0;
  for (int a = 0; a <= dim; ++a) {
    num *= factorial(k[a]);
    total += k[a];
  }
  return num / factorial(dim + total);
}

double apply(const SimplexRule& rule, const std::array<int, 4>& k) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    double v = rule.weights[q];
    for (int a = 0; a <= rule.dim; ++a) v *= std::pow(rule.barycentric[q][a], k[a]);
    s += v;
  }
  return s;
}

} // namespace

TEST_CASE("simplex rules integrate monomials up to their degree") {
  for (int dim : {2, 3}) {
    const auto r2 = degree2_rule(dim);
    const auto r5 = degree5_rule(dim);
    CHECK(r2.size() == static_cast<std::size_t>(dim + 1));
    for (int a = 0; a <= 5; ++a)
      for (int b = 0; a + b <= 5; ++b)
        for (int c = 0; a + b + c <= 5; ++c) {
          std::array<int, 4> k{a, b, c, 0};
          const double exact = monomial_fraction(dim, k);
          CHECK(apply(r5, k) == doctest::Approx(exact).epsilon(1e-13));
          if (a + b + c <= 2) CHECK(apply(r2, k) == doctest::Approx(exact).epsilon(1e-13));
        }
  }
}

TEST_CASE("Gauss-Legendre on [0,1]") {
  std::vector<double> x, w;
  gauss_legendre_unit(4, x, w);
  REQUIRE(x.size() == 4u);
  for (int p = 0; p <= 7; ++p) {
    double s = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) s += w[q] * std::pow(x[q], p);
    CHECK(s == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
  }
}

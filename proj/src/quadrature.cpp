#include "stmeta/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stm {

void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map [-1, 1] -> [0, 1].
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

SimplexRule degree2_rule(int dim) {
  SimplexRule rule;
  rule.dim = dim;
  if (dim == 2) {
    const double a = 2.0 / 3.0, b = 1.0 / 6.0;
    rule.barycentric = {{a, b, b, 0.0}, {b, a, b, 0.0}, {b, b, a, 0.0}};
    rule.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  } else if (dim == 3) {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    rule.barycentric = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
    rule.weights = {0.25, 0.25, 0.25, 0.25};
  } else {
    throw std::invalid_argument("degree2_rule: dim must be 2 or 3");
  }
  return rule;
}

SimplexRule collapsed_gauss_rule(int dim, int n) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("collapsed_gauss_rule: dim must be 2 or 3");
  std::vector<double> x, w;
  gauss_legendre_unit(n, x, w);
  SimplexRule rule;
  rule.dim = dim;
  // Reference volume is 1/dim!; weights are normalized by it.
  const double scale = dim == 2 ? 2.0 : 6.0;
  if (dim == 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double s = x[i], t = x[j];
        const double xi1 = s, xi2 = t * (1.0 - s);
        rule.barycentric.push_back({1.0 - xi1 - xi2, xi1, xi2, 0.0});
        rule.weights.push_back(scale * w[i] * w[j] * (1.0 - s));
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double s = x[i], t = x[j], r = x[k];
          const double xi1 = s, xi2 = t * (1.0 - s), xi3 = r * (1.0 - s) * (1.0 - t);
          rule.barycentric.push_back({1.0 - xi1 - xi2 - xi3, xi1, xi2, xi3});
          rule.weights.push_back(scale * w[i] * w[j] * w[k] * (1.0 - s) * (1.0 - s) * (1.0 - t));
        }
      }
    }
  }
  return rule;
}

SimplexRule degree5_rule(int dim) { return collapsed_gauss_rule(dim, 4); }

} // namespace stm

#pragma once

#include <array>
#include <vector>

namespace stm {

/// Quadrature on the reference simplex of dimension `dim` (2 or 3), in
/// barycentric coordinates. Weights sum to 1, i.e. they are fractions of the
/// cell volume.
struct SimplexRule {
  int dim = 2;
  std::vector<std::array<double, 4>> barycentric;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Degree-2 rule: 3 points on triangles, 4 on tetrahedra.
SimplexRule degree2_rule(int dim);

/// Collapsed (Duffy) Gauss-Legendre product rule with `n` points per
/// direction; exact for polynomials of degree 2n - dim.
SimplexRule collapsed_gauss_rule(int dim, int n);

/// Rule exact to degree >= 5 (collapsed Gauss, 4 points per direction).
SimplexRule degree5_rule(int dim);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace stm

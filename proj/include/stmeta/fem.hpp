#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "stmeta/mesh.hpp"
#include "stmeta/quadrature.hpp"
#include "stmeta/sparse.hpp"

namespace stm {

/// Pointwise function on the space-time domain.
using SpaceTimeFn = std::function<double(const Point&)>;

/// P1 coefficients on the dofs of a mesh, stored component-major:
/// values[c * n_dofs + dof].
struct NodalField {
  int components = 1;
  std::vector<double> values;

  NodalField() = default;
  NodalField(int n_components, std::size_t n_dofs, double fill = 0.0)
      : components(n_components), values(static_cast<std::size_t>(n_components) * n_dofs, fill) {}

  [[nodiscard]] std::size_t n_dofs() const {
    return components > 0 ? values.size() / static_cast<std::size_t>(components) : 0;
  }
  [[nodiscard]] std::span<double> component(int c) {
    return {values.data() + static_cast<std::size_t>(c) * n_dofs(), n_dofs()};
  }
  [[nodiscard]] std::span<const double> component(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * n_dofs(), n_dofs()};
  }
};

/// Spatial velocity u (d components); the transport direction is b = (u, 1).
struct SpaceTimeVelocity {
  NodalField u;
};

/// Throws std::invalid_argument if `field` does not live on `mesh`.
void check_field(const SimplexMesh& mesh, const NodalField& field, int components, const char* who);

SpaceTimeVelocity zero_velocity(const SimplexMesh& mesh);
SpaceTimeVelocity interpolate_velocity(const SimplexMesh& mesh,
                                       const std::vector<SpaceTimeFn>& components);

/// Volume and barycentric gradients of one cell. grad[a][k] is the k-th
/// space-time derivative of the a-th barycentric coordinate.
struct CellGeometry {
  double volume = 0.0;
  std::array<std::array<double, 3>, 4> grad{};
};

CellGeometry cell_geometry(const SimplexMesh& mesh, std::size_t cell);

/// Physical coordinates of a barycentric point in a cell.
Point map_to_cell(const SimplexMesh& mesh, std::size_t cell, const std::array<double, 4>& lambda);

/// Local matrix of the least-squares advection form on one cell, row-major
/// (dim+1) x (dim+1) in a 4x4 array.
std::array<double, 16> lsq_advection_element(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                                             std::size_t cell, const SimplexRule& rule);

/// A_ij = integral of (b . grad phi_i)(b . grad phi_j). Element matrices
/// are computed in parallel and scattered in cell order.
SparseMatrix assemble_lsq_advection(const SimplexMesh& mesh, const SpaceTimeVelocity& u);
/// Serial reference for `assemble_lsq_advection`.
SparseMatrix assemble_lsq_advection_serial(const SimplexMesh& mesh, const SpaceTimeVelocity& u);

SparseMatrix assemble_mass(const SimplexMesh& mesh);

enum class GradMode { spatial, spacetime };

/// M + alpha^2 K, with K the spatial (default) or full space-time stiffness.
/// Throws std::invalid_argument for alpha <= 0.
SparseMatrix assemble_helmholtz(const SimplexMesh& mesh, double alpha,
                                GradMode mode = GradMode::spatial);

/// b_i = integral of f (b . grad phi_i), degree-5 quadrature.
std::vector<double> assemble_forcing(const SimplexMesh& mesh, const SpaceTimeVelocity& u,
                                     const SpaceTimeFn& f);

struct ConstrainedSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
};

/// Symmetric elimination of fixed dofs: rhs <- rhs - A g, constrained rows and
/// columns replaced by the identity, constrained rhs entries set to the
/// prescribed values.
ConstrainedSystem apply_dirichlet(const SparseMatrix& a, std::span<const double> rhs,
                                  const std::map<std::size_t, double>& constrained);

/// Dof constraints I = I0 on gamma0 and I = I1 on gamma1 by nodal
/// interpolation at the master nodes.
std::map<std::size_t, double> boundary_constraints(const SimplexMesh& mesh, const SpaceTimeFn& i0,
                                                   const SpaceTimeFn& i1);

/// Same, from a nodal field's values on the gamma dofs.
std::map<std::size_t, double> boundary_constraints(const SimplexMesh& mesh,
                                                   const NodalField& field);

/// Field value at each dof = g at the dof's master node.
NodalField interpolate(const SimplexMesh& mesh, const SpaceTimeFn& g);

/// Point evaluation of a P1 field; throws std::out_of_range outside the mesh.
double evaluate(const SimplexMesh& mesh, const NodalField& field, const Point& p, int component = 0);

double l2_norm(const SimplexMesh& mesh, const NodalField& field);
/// || b . grad_t f ||, b from the nodal velocity.
double energy_seminorm(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeVelocity& u);
/// sqrt(||f||^2 + ||f||_E^2).
double graph_norm(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeVelocity& u);
/// sqrt(int_{gamma0} f^2 + int_{gamma1} f^2).
double boundary_norm(const SimplexMesh& mesh, const NodalField& field);

/// || f - (b_h . grad_t field) ||, b_h from the nodal velocity; f = 0 when empty.
double residual_norm(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeVelocity& u,
                     const SpaceTimeFn& f);

/// || exact - field || in L2, degree-5 quadrature.
double l2_error(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeFn& exact);

/// || b . grad_t (exact - field) || where b = (velocity, 1) is evaluated
/// pointwise and `material_derivative` = b . grad_t exact.
double energy_error(const SimplexMesh& mesh, const NodalField& field,
                    const std::vector<SpaceTimeFn>& velocity, const SpaceTimeFn& material_derivative);

} // namespace stm

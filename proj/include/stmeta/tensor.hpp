#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "stmeta/fem.hpp"

namespace stm {

// Tensor-product Q1 elements (bilinear for d = 1, trilinear for d = 2) on
// the lattice underlying a SimplexMesh. Vertices and dofs are shared with
// the P1 discretization, so NodalField and the boundary helpers apply
// unchanged; only the element operators differ. Velocities are evaluated
// pointwise at the quadrature points.

/// Number of lattice boxes (n_space^d * n_time).
std::size_t q1_box_count(const SimplexMesh& mesh);

/// Dofs of the 2^(d+1) corners of a box, corner bits ordered (x, y, t).
std::array<std::size_t, 8> q1_box_dofs(const SimplexMesh& mesh, std::size_t box);

/// Entry (i,j) = int (b . grad_t psi_i)(b . grad_t psi_j), b = (u(x,t), 1),
/// by the 3-point Gauss rule per axis.
SparseMatrix assemble_lsq_advection_q1(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity);

/// Serial reference of the same assembly.
SparseMatrix assemble_lsq_advection_q1_serial(const SimplexMesh& mesh,
                                              const std::vector<SpaceTimeFn>& velocity);

/// Entry i = int f (b . grad_t psi_i).
std::vector<double> assemble_forcing_q1(const SimplexMesh& mesh, const std::vector<SpaceTimeFn>& velocity,
                                        const SpaceTimeFn& f);

/// Value of a Q1 field at p.
double evaluate_q1(const SimplexMesh& mesh, const NodalField& field, const Point& p);

double q1_l2_norm(const SimplexMesh& mesh, const NodalField& field);

/// || u . grad I + dI/dt - f || for the Q1 interpretation of the field; an
/// empty f means zero.
double q1_residual_norm(const SimplexMesh& mesh, const NodalField& field,
                        const std::vector<SpaceTimeFn>& velocity, const SpaceTimeFn& f = {});

double q1_l2_error(const SimplexMesh& mesh, const NodalField& field, const SpaceTimeFn& exact);

} // namespace stm

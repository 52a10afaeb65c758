#pragma once

// Staggered-grid calculus on a Grid: scalars on nodes, vectors as link
// components (value of the field along the link at its midpoint), curls on
// plaquettes. Boundary links carry half weight so that the discrete
// divergence includes the zero-normal-flux condition.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "glwire/domain.hpp"

namespace glwire {

using cplx = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

/// Link field (u_j - u_i)/h.
RealField gradient(const Grid& g, std::span<const double> u);

/// Outward flux sum at each node: sum_l w_l h V_l (sign +1 when l leaves the node).
RealField flux(const Grid& g, std::span<const double> V);

/// flux / node_area; the weighted discrete divergence.
RealField divergence(const Grid& g, std::span<const double> V);

/// Circulation per unit area around each plaquette.
RealField curl(const Grid& g, std::span<const double> A);

/// curl of a plaquette scalar, (dB/dy, -dB/dx), evaluated on links. Boundary
/// links take their outside value from boundary_B (indexed by link), placed on
/// the boundary itself, half a cell from the adjacent plaquette centre.
RealField curl_scalar(const Grid& g, std::span<const double> B, std::span<const double> boundary_B);

/// Plaquette average of a node field.
RealField node_to_plaquette(const Grid& g, std::span<const double> u);

/// Node average of a plaquette field; boundary nodes use boundary_node_value.
RealField plaquette_to_node(const Grid& g, std::span<const double> B,
                            std::span<const double> boundary_node_value);

/// Link average of a node field.
RealField node_to_link(const Grid& g, std::span<const double> u);

/// Weighted stiffness matrix K with u^T K u = sum_l w_l (u_i - u_j)^2.
Eigen::SparseMatrix<double> stiffness_matrix(const Grid& g);

/// Area-weighted integral and mean of a node field.
double integrate(const Grid& g, std::span<const double> u);
double mean(const Grid& g, std::span<const double> u);

/// Area-weighted L2 norm over nodes.
double l2_norm(const Grid& g, std::span<const double> u);
double l2_norm(const Grid& g, std::span<const cplx> u);

/// Link L2 norm, sqrt(sum_l w_l h^2 V_l^2). interior_only skips boundary links.
double link_l2_norm(const Grid& g, std::span<const double> V, bool interior_only = false);

/// Trapezoid mean over the closed boundary.
double boundary_mean(const Grid& g, std::span<const double> u);

}  // namespace glwire

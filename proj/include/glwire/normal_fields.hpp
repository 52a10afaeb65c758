#pragma once

// Normal-state fields (psi = 0): the induced field B_n, the electric
// potential phi_n and a Coulomb-gauge potential A_n, plus the regions cut
// out of the domain by thresholding B_n.

#include <array>
#include <cstdint>
#include <vector>

#include "glwire/domain.hpp"
#include "glwire/operators.hpp"

namespace glwire {

struct NormalFields {
  RealField Bn;    // nodes
  RealField phin;  // nodes, zero mean
  RealField An;    // links
  double h1 = 0.0, h2 = 0.0, h = 0.0, h_ex = 0.0;
};

/// Boundary trace of B_n: cumulative trapezoid of J counterclockwise from
/// (0,0), shifted to boundary mean h_ex. Returned as a node field whose
/// interior entries are zero.
RealField bn_boundary_trace(const Grid& g, const CurrentProfile& J, double h_ex);

/// Harmonic extension of the boundary trace. Throws CompatibilityError if J
/// fails validation.
RealField solve_Bn(const WireDomain& d, const CurrentProfile& J, double h_ex);

/// Right-hand side f of K phi = f for the Neumann problem -dphi/dnu = J.
RealField phin_load(const Grid& g, const CurrentProfile& J);

/// Neumann solve for phi_n with zero mean. Throws CompatibilityError when
/// the total current is not zero.
RealField solve_phin(const WireDomain& d, const CurrentProfile& J);

/// Divergence-free potential with plaquette curl equal to the plaquette
/// average of Bn, from a stream function vanishing on the boundary.
RealField recover_An(const Grid& g, std::span<const double> Bn);

NormalFields compute_normal_fields(const WireDomain& d, const CurrentProfile& J, double h_ex);

struct HjReport {
  std::array<double, 2> formula{};  // boundary-integral formula at the side midpoints
  std::array<double, 2> trace{};    // value of the B_n trace on each insulating side
  /// Formula evaluated at three points (1/4, 1/2, 3/4 of each side).
  std::array<std::array<double, 3>, 2> formula_samples{};
  double h = 0.0;
  bool sign_condition = false;  // h1 * h2 < 0
};

/// h_j = h_ex - (1/|dOmega|) int |Gamma(x~, x_j)| J(x~) ds, j = 1 at x = 0,
/// j = 2 at x = Lx, compared with the solved trace.
HjReport compute_hj(const WireDomain& d, const CurrentProfile& J, double h_ex);

/// Same formula at an arbitrary arclength on the boundary.
double hj_formula_at(const WireDomain& d, const CurrentProfile& J, double h_ex, double s);

/// max over interior nodes of |d_x phi + d_y B| + |d_y phi - d_x B|
/// (centred differences); zero for an exact conjugate pair.
double conjugacy_residual(const Grid& g, std::span<const double> Bn, std::span<const double> phin);

/// Minimum over interior nodes of the centred-difference |grad Bn|.
double min_grad_Bn(const Grid& g, std::span<const double> Bn);

using Mask = std::vector<std::uint8_t>;
using Point = std::array<double, 2>;

struct RegionMasks {
  double delta = 0.0;
  std::array<Mask, 2> omega;        // (-1)^j Bn > 1
  Mask S;                           // |Bn| > 1 + delta
  std::array<Mask, 2> S_j;          // (-1)^j Bn > 1 + delta
  std::array<Mask, 2> omega_delta;  // S_j and dist to insulators > delta
  std::array<std::vector<Point>, 2> C;      // interior boundary of S_j
  std::array<std::vector<Point>, 2> Gamma;  // boundary of omega_delta_j off the contacts
  std::array<RealField, 2> dist_to_C;
  std::array<RealField, 2> dist_to_Gamma;
  std::size_t S_components = 0;
  bool S_empty = true;
};

/// Thresholds Bn at level 1 + delta with strict inequalities. Region
/// boundaries are the linear-interpolated crossings of the indicator along
/// links; distances are brute-force Euclidean.
RegionMasks extract_regions(const Grid& g, std::span<const double> Bn, double delta);

/// Number of 4-connected components of a node mask.
std::size_t count_components(const Grid& g, const Mask& m);

/// Crossing points of the zero level of f along links joining a node with
/// f > 0 to a node with f <= 0.
std::vector<Point> level_crossings(const Grid& g, std::span<const double> f);

/// Euclidean distance from every node to the nearest point of a set; +inf if empty.
RealField distance_to_points(const Grid& g, const std::vector<Point>& pts);

std::size_t count(const Mask& m);

}  // namespace glwire

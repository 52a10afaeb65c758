#pragma once

// Ground states of magnetic Schrodinger operators: the de Gennes constant,
// Dirichlet-Neumann sectors, semiclassical energies on wire subdomains, and
// the divergence-free curl eigenvalue of a rectangle.

#include <cstdint>
#include <span>
#include <vector>

#include "glwire/normal_fields.hpp"
#include "glwire/operators.hpp"

namespace glwire {

struct EigResult {
  double value = 0.0;
  ComplexField vector;  // unit L2 norm with respect to the problem's mass
  int iterations = 0;
  double residual = 0.0;  // mass-weighted L2 norm of H u - value u
};

struct EigOptions {
  double tol = 1e-8;
  int max_iter = 400;
  int block = 6;
  std::uint64_t seed = 1;
};

/// Lowest eigenvalue of -u'' + (t - xi)^2 u on (0, T), u'(0) = 0, u(T) = 0.
EigResult de_gennes_mu(double xi, double T_trunc, double h_mesh);

struct Theta0Result {
  double theta0 = 0.0;
  double xi0 = 0.0;
  std::vector<double> xi_scan;
  std::vector<double> mu_scan;
  int evaluations = 0;
};

/// min over xi of de_gennes_mu: coarse scan over xi_grid, then golden section
/// to 1e-6 in xi. An empty xi_grid means 0.20, 0.25, ..., 1.40.
Theta0Result de_gennes_theta0(double T_trunc = 10.0, double h_mesh = 0.01, std::vector<double> xi_grid = {});

struct SectorProblem {
  double alpha = 1.5707963267948966;
  double R_trunc = 12.0;
  double h_mesh = 0.05;
};

/// Unit-field magnetic Laplacian on {0 < arg < alpha, r < R} in the symmetric
/// gauge: magnetic Neumann on arg = 0, Dirichlet on arg = alpha and r = R.
EigResult sector_dn_ground(const SectorProblem& p, const EigOptions& opt = {});

enum class DirichletPart { All, OffInsulators };

/// Ground energy of sum_l w |eps (U u_b - u_a)|^2 / sum area |u|^2 over node
/// functions supported in D, U = exp(-i h A / eps). Nodes of D next to the
/// complement of D, and contact nodes, are Dirichlet; with OffInsulators the
/// insulator edges of the wire keep the natural (magnetic Neumann) condition,
/// otherwise every grid-boundary node is Dirichlet too.
EigResult mu_eps(const Grid& g, std::span<const double> A, const Mask& D, double eps, DirichletPart part,
                 const EigOptions& opt = {});

struct BoundReport {
  std::vector<double> eps;
  std::vector<double> lhs;    // mu_eps(A + eps^{1/2} a, D)
  std::vector<double> C_hat;  // empirical constant
  std::vector<bool> out_of_regime;
  double b = 0.0;        // min curl A over D
  double b_prime = 0.0;  // min |curl A| along the insulator part of D (inf if none)
  double theta0 = 0.0;
  double grad_a_inf = 0.0;
  bool bounded = false;
};

/// Empirical check of the semiclassical lower bound
/// mu_eps(A + eps^{1/2} a, D) >= eps min(b, theta0 b') (1 - C (1 + |grad a|^2) eps^{1/3}).
/// eps_list is processed in the given order; bounded means C_hat does not grow
/// beyond twice its first in-regime value (floored at 1/4) as eps decreases.
BoundReport verify_lower_bound(const Grid& g, std::span<const double> A, std::span<const double> a, const Mask& D,
                               const std::vector<double>& eps_list, double theta0, const EigOptions& opt = {});

/// First Dirichlet eigenvalue of the 5-point Laplacian on the grid.
EigResult lambda_dirichlet(const Grid& g, const EigOptions& opt = {});

/// Smallest value of |curl V|^2 / |V|^2 over discretely divergence-free link
/// fields with zero normal flux, V the perpendicular gradient of a plaquette
/// stream function vanishing on the boundary.
EigResult lambda_curl(const Grid& g, const EigOptions& opt = {});

struct LambdaPair {
  double lambda = 0.0;
  double lambdaD = 0.0;
};
LambdaPair lambda_vs_lambdaD(double Lx, double Ly, double h, const EigOptions& opt = {});

}  // namespace glwire

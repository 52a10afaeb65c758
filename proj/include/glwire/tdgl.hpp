#pragma once

// Gauge-invariant discretization of the time-dependent Ginzburg-Landau
// system with current fed through the contacts.
//
//   psi_t - Lap_{kA} psi + i k phi psi = k^2 (1 - |psi|^2) psi
//   (1/c)(A_t + grad phi) + curl^2 A = g (1/k) Im(conj(psi) grad_{kA} psi)
//
// g = 1 is the standard system; the rescaled large-domain system uses
// g = k^2 (see analysis.hpp). psi lives on nodes, A on links with link
// variables exp(-i k h A), phi on nodes. phi is eliminated every step by a
// Neumann solve that keeps div A fixed. The field curl A is prescribed as
// k B_n on the boundary.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "glwire/laplace.hpp"
#include "glwire/normal_fields.hpp"

namespace glwire {

struct PhysicsParams {
  double kappa = 4.0;
  double c = 1.0;
  double h_ex = 0.0;
  double g = 1.0;  // supercurrent coupling in the A equation
};

enum class Scheme { Explicit, SemiImplicit };

struct GLState {
  ComplexField psi;
  RealField A;
  RealField phi;
  double t = 0.0;
  long step = 0;
};

struct Observables {
  double psi_l2 = 0.0;
  double psi_l4 = 0.0;
  double psi_sup = 0.0;
  double kinetic = 0.0;   // sum_l w_l |U psi_b - psi_a|^2, the discrete |grad_{kA} psi|^2
  double cut_flux = 0.0;  // supercurrent through the horizontal mid cut
};

struct StepReport {
  double dt_used = 0.0;
  double dpsi_inf = 0.0;  // max |psi^{n+1} - psi^n|
  double dA_inf = 0.0;
  double div_drift = 0.0;  // max |div A| seen before the last projection
  Observables obs;
};

struct ResidualReport {
  double psi_eq = 0.0;         // L2 over interior and insulator nodes
  double A_eq = 0.0;           // L2 over interior links
  double contact_psi = 0.0;    // max |psi| on contact nodes
  double insulator_psi = 0.0;  // L2 of the covariant normal derivative on insulators
  double contact_phi = 0.0;    // L2 of dphi/dnu + c k J on contacts
  double insulator_phi = 0.0;  // L2 of dphi/dnu on insulators
  double circulation = 0.0;    // |mean boundary curl A - k h_ex|
  double psi_eq_rel = 0.0;
  double A_eq_rel = 0.0;
  double bc_rel = 0.0;
  double max_rel() const;
};

struct IdentityReport {
  double energy = 0.0;      // |K + k^2 |psi|_4^4 - k^2 |psi|_2^2|
  double energy_rel = 0.0;  // divided by k^2 |psi|_2^2
  double potential = 0.0;   // L2 of the phi equation residual
  double potential_rel = 0.0;
  double orthogonality = 0.0;  // |int |psi|^2 phi|
  double scale = 0.0;          // k^2 |psi|_2^2
};

enum class InitialData { Tapered, Random, Normal, Uniform };

struct ConvergenceReport {
  enum class Status { Converged, MaxTime } status = Status::MaxTime;
  bool mixed = false;  // psi_l2 above the normal-like threshold
  double final_rate = 0.0;
  long steps = 0;
  double t = 0.0;
  ResidualReport residual;
};

class TdglSystem {
public:
  TdglSystem(WireDomain domain, CurrentProfile J, PhysicsParams params,
             Scheme scheme = Scheme::Explicit, double dt = 0.0, double dt_factor = 0.2);
  ~TdglSystem();
  TdglSystem(TdglSystem&&) noexcept;
  TdglSystem& operator=(TdglSystem&&) noexcept;

  const WireDomain& domain() const;
  const Grid& grid() const;
  const CurrentProfile& current() const;
  const PhysicsParams& params() const;
  const NormalFields& normal() const;
  Scheme scheme() const;
  double dt() const;
  int projection_interval() const;
  void set_projection_interval(int n);

  /// Stable step for the chosen scheme.
  static double default_dt(const Grid& g, const PhysicsParams& p, Scheme s, double factor);

  GLState normal_state() const;
  GLState initial_state(InitialData kind, std::uint64_t seed = 0) const;

  /// One step. Throws BlowupError on non-finite or runaway fields.
  StepReport step(GLState& s);

  /// Solves the Poisson problem for phi that keeps div A fixed.
  RealField solve_phi(const GLState& s) const;

  void project_coulomb(GLState& s) const;

  ResidualReport residual(const GLState& s) const;
  IdentityReport steady_identities(const GLState& s) const;
  Observables observables(const GLState& s) const;

  /// Link field (1/k) Im(conj(psi) grad_{kA} psi).
  RealField supercurrent(const GLState& s) const;
  /// curl A on plaquettes.
  RealField field(const GLState& s) const;
  /// Prescribed boundary field k B_n, indexed by link (boundary links only).
  const RealField& boundary_field() const;

  /// Integrates until max(|dpsi|_inf, |dA|_inf)/dt < tol or t_max. The
  /// observer, if given, is called after every step.
  ConvergenceReport run_to_steady(GLState& s, double tol, double t_max,
                                  const std::function<void(const GLState&, const StepReport&)>& observer = {});

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Applies A += grad omega, psi *= exp(i k omega), phi -= omega_t.
void gauge_transform(GLState& s, const Grid& g, std::span<const double> omega, double kappa,
                     std::span<const double> omega_t = {});

/// Normal-like threshold on |psi|_2.
double normal_threshold(const Grid& g);

}  // namespace glwire

#pragma once

// Post-processing of simulated states: exponential decay fits away from the
// superconducting region, kappa sweeps, time-asymptotic tracking, and the
// large-domain rescaling with its comparison problem.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glwire/tdgl.hpp"

namespace glwire {

struct CurrentSpec {
  std::string family = "cosine";  // zero | constant | bump | cosine
  double J0 = 1.0;
  double a = 0.5;  // cosine only
  double b = 0.0;
};

/// Throws ConfigError for an unknown family.
CurrentProfile make_current(const Grid& g, const CurrentSpec& spec);

/// Nodewise |psi|^2.
RealField density(std::span<const cplx> psi);

/// int_mask rho / int_Omega rho (0 when rho vanishes identically).
double mass_fraction(const Grid& g, std::span<const double> rho, const Mask& mask);

struct DecayFit {
  double slope = 0.0;  // |psi| ~ exp(-slope d)
  double intercept = 0.0;
  double r_squared = 0.0;
  int region_id = 0;
  std::size_t n_points = 0;
  double d_min = 0.0, d_max = 0.0;
  double agmon_integral = 0.0;  // int_region exp(weight_rate d) rho
  double agmon_scaled = 0.0;    // times delta^{3/2}
};

/// Least squares of log rho against -2 d over the region. Points need
/// rho > 1e-300 and d > 2h; nodes within 2h of a contact are dropped too,
/// since psi = 0 there is imposed rather than decayed into. Throws
/// EmptyRegion below 20 region nodes and DegenerateFit when fewer than three
/// points survive or all their distances coincide.
DecayFit fit_decay(const Grid& g, std::span<const double> rho, const Mask& region, std::span<const double> dist,
                   double weight_rate, double delta);

enum class DecayReference {
  Gamma,  // omega_{delta,j} with distance to Gamma_{delta,j}
  C,      // S_{delta,j} with distance to C_{delta,j}
};

/// Decay fit on side j (1 = x=0, 2 = x=Lx) with Agmon weight exp(delta^{1/2} kappa d).
DecayFit agmon_fit(const Grid& g, std::span<const double> rho, const RegionMasks& m, int j, double kappa,
                   DecayReference ref = DecayReference::Gamma);

struct PhiView {
  double C = 0.0;
  RealField Phi;
  double orthogonality = 0.0;      // |int rho Phi|
  double orthogonality_rel = 0.0;  // divided by int rho * |phi_n|_inf
  double phin_inf = 0.0;
  bool bound_ok = false;  // |C| <= |phi_n|_inf
};

/// Shift of phi_n that makes it orthogonal to rho. Throws ZeroOrderParameter.
PhiView phi_n_view(const Grid& g, std::span<const double> phin, std::span<const double> rho);

struct Lemma31Report {
  double kappa = 0.0, delta = 0.0, alpha = 0.5;
  std::size_t n_S = 0;  // nodes of S_{delta + kappa^-alpha}
  std::size_t violations = 0;
  bool holds = false;
};

/// Node-wise inclusion S_{delta+kappa^-alpha} in {|curl A| > (1+delta) kappa};
/// curl A is moved to nodes by plaquette averaging with k B_n on the boundary.
Lemma31Report lemma31_check(const Grid& g, std::span<const double> Bn, std::span<const double> field_plaquettes,
                            double kappa, double delta, double alpha = 0.5);

struct DecayTrack {
  std::vector<double> t, m;
  double limsup = 0.0;  // max over the trailing window
  double window_mean = 0.0;
  double drift = 0.0;  // |mean(second half) - mean(first half)| / mean over the window
  bool horizon_ok = false;
};

/// Samples m(t) = int_mask |psi|^2.
class DecayTracker {
public:
  DecayTracker(const Grid& g, Mask mask) : g_(&g), mask_(std::move(mask)) {}
  void record(double t, std::span<const cplx> psi);
  /// Window = trailing fraction of the recorded times.
  DecayTrack finish(double window = 0.2, double max_drift = 0.01) const;

private:
  const Grid* g_;
  Mask mask_;
  std::vector<double> t_, m_;
};

/// Throws InsufficientHorizon when the drift exceeds max_drift.
DecayTrack time_decay_track(const DecayTracker& tracker, double window = 0.2, double max_drift = 0.01);

struct WireCase {
  double Lx = 2.0, Ly = 1.0;
  std::size_t nx = 65, ny = 33;
  CurrentSpec current;
  PhysicsParams phys;
  std::optional<double> h2_target;  // if set, h_ex is chosen so that h_2 equals it
  Scheme scheme = Scheme::SemiImplicit;
  double dt_factor = 1.0;
  double tol = 1e-8;
  double t_max = 100.0;
  int n_proj = 10;
  std::uint64_t seed = 0;
  InitialData init = InitialData::Tapered;
  double delta = 0.25;
  int region = 2;
  double window = 0.2;  // trailing fraction of t_max averaged when not converged
};

struct CaseResult {
  WireCase config;  // with h_ex resolved
  ConvergenceReport conv;
  GLState state;
  Observables obs;
  IdentityReport identities;
  HjReport hj;
  RegionMasks masks;
  RealField Bn;  // nodes
  bool averaged = false;  // rho and field are trailing-window averages
  RealField rho;
  RealField field;  // curl A on plaquettes
  double psi_l2 = 0.0;  // sqrt(int rho)
  double ratio = 0.0;   // mass fraction in omega_{delta,region}
  std::optional<DecayFit> fit_gamma, fit_C;
  std::string fit_error;
  DecayTrack track;
  std::optional<PhiView> phi;
  Lemma31Report lemma;
  double wall_seconds = 0.0;
};

/// Called after every step with the system being integrated.
using StepObserver = std::function<void(const TdglSystem&, const GLState&, const StepReport&)>;

/// Normal fields, TDGL run and all per-run analysis. If the run does not
/// reach tol by t_max, density and field are averaged over the trailing
/// window, which is the time-asymptotic object for periodic states.
CaseResult run_wire_case(const WireCase& c, const StepObserver& observer = {});

struct SweepRow {
  double param = 0.0;
  bool ok = false;
  std::string error;
  double psi_l2 = 0.0, psi_sup = 0.0;
  bool converged = false, mixed = false;
  double slope_gamma = 0.0, r2_gamma = 0.0;
  double slope_C = 0.0, r2_C = 0.0;
  double ratio = 0.0;
  double limsup = 0.0;
  double energy_rel = 0.0, potential_rel = 0.0, orthogonality_rel = 0.0;
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::string param;
  std::vector<SweepRow> rows;  // sorted by param
  double exponent = 0.0;       // psi_l2 ~ param^exponent
  double exponent_ci = 0.0;    // 95% half width
  bool exponent_fitted = false;
  double C_bound = 0.0;
  bool bound_ok = false;
  bool monotone = false;
  bool degenerate = false;  // every row normal
};

/// Log-log least squares of y against x with a 95% t-interval half width.
std::array<double, 2> loglog_exponent(const std::vector<double>& x, const std::vector<double>& y);

/// Calls fn(0..n-1) on up to jobs threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Runs base with kappa replaced by each value. Row failures are kept.
SweepResult kappa_sweep(const std::vector<double>& kappas, const WireCase& base, int jobs = 1,
                        const std::function<CaseResult(const WireCase&)>& runner = {});

SweepRow make_sweep_row(double param, const CaseResult& r);

/// Fills the exponent and bound fields of a sweep whose rows are set.
void check_kappa_bound(SweepResult& s, double c);

struct LargeDomainParams {
  double eps = 0.125;
  double gamma = 0.5;
  double Lx = 1.0, Ly = 1.0;
  std::size_t nx = 65, ny = 65;
  CurrentSpec current{"constant", 1.0, 0.0, 0.0};
  double h_ex = 0.0;  // before the eps^-gamma scaling
  double delta = 0.25;
  Scheme scheme = Scheme::SemiImplicit;
  double dt_factor = 1.0;
  double tol = 1e-6;
  double t_max = 20.0;
  double window = 0.2;
  std::uint64_t seed = 0;
  InitialData init = InitialData::Tapered;
};

struct WComparison {
  RealField w;
  double defect = 0.0;  // |B - 1 - w|_inf
  double upper = 0.0;   // max (B - 1 - w)
  double lower = 0.0;   // min (B - 1 - w)
  double residual = 0.0;
};

struct LargeDomainRun {
  LargeDomainParams params;
  double kappa = 0.0, g = 0.0, F = 0.0;  // 1/eps, kappa^2, eps^-gamma
  std::array<double, 2> b{};             // h_j of the unscaled current
  double delta0 = 0.0;
  ConvergenceReport conv;
  GLState state;
  bool averaged = false;
  RealField rho;
  RealField B_eps;  // nodes
  Mask D_delta;
  std::array<double, 2> d_delta_j{};
  double d_delta = 0.0;
  WComparison w;
  std::optional<DecayFit> decay;
  double predicted_rate = 0.0;
  std::string fit_error;
  double wall_seconds = 0.0;
};

/// Solves the rescaled steady problem with the TDGL solver: kappa = 1/eps,
/// supercurrent coupling g = kappa^2, current and applied field scaled by
/// eps^-gamma. B_eps = curl A / kappa.
LargeDomainRun large_domain_run(const LargeDomainParams& p, const StepObserver& observer = {});

/// Delta w - rho w / eps^2 = 0 with w = B - 1 on the boundary.
WComparison w_comparison(const Grid& g, std::span<const double> rho, std::span<const double> B_nodes, double eps);

/// {|B| < delta eps^-gamma}.
Mask large_domain_region(std::span<const double> B_nodes, double delta, double eps, double gamma);

/// Distances from D to the two insulating sides; +inf for an empty D.
std::array<double, 2> insulator_distances(const Grid& g, const Mask& D);

/// Distance of every node to the 8-neighbour boundary nodes of D.
RealField distance_to_mask(const Grid& g, const Mask& D);

/// Decay of rho outside D against distance to D, with the weight rate
/// (2 delta theta0 eps^-gamma)^{1/2}/(4 eps).
DecayFit agmon_large_domain(const Grid& g, std::span<const double> rho, const Mask& D, double eps, double gamma,
                            double delta, double theta0);

/// Decay rate of |psi| predicted by the cutoff argument: (delta theta0 eps^-gamma / 2)^{1/2} / (2 eps).
double predicted_large_domain_rate(double eps, double gamma, double delta, double theta0);

}  // namespace glwire

#include "glwire/tdgl.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "glwire/errors.hpp"

namespace glwire {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<cplx>;

std::vector<cplx> link_phases(const Grid& g, std::span<const double> A, double kappa) {
  std::vector<cplx> U(g.num_links());
  const double s = -kappa * g.h();
  for (std::size_t l = 0; l < U.size(); ++l) U[l] = std::polar(1.0, s * A[l]);
  return U;
}

/// area-weighted covariant Laplacian times the node area: sum_l w_l (U psi_j - psi_i).
ComplexField cov_flux(const Grid& g, std::span<const cplx> psi, std::span<const cplx> U) {
  ComplexField out(g.num_nodes(), cplx(0.0));
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    const double w = g.link_weight(l);
    out[a] += w * (U[l] * psi[b] - psi[a]);
    out[b] += w * (std::conj(U[l]) * psi[a] - psi[b]);
  }
  return out;
}

RealField supercurrent_links(const Grid& g, std::span<const cplx> psi, std::span<const cplx> U, double kappa) {
  RealField j(g.num_links());
  const double s = 1.0 / (kappa * g.h());
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    j[l] = s * std::imag(std::conj(psi[a]) * U[l] * psi[b]);
  }
  return j;
}

double sq(double x) { return x * x; }

}  // namespace

double ResidualReport::max_rel() const { return std::max({psi_eq_rel, A_eq_rel, bc_rel}); }

double normal_threshold(const Grid& g) { return 1e-4 * std::sqrt(g.total_area()); }

struct TdglSystem::Impl {
  WireDomain d;
  CurrentProfile J;
  PhysicsParams p;
  Scheme scheme;
  double dt;
  int nproj = 10;
  NormalFields nf;
  RealField Bb;         // k B_n at boundary-link midpoints
  RealField curl2_bc;   // curl^2 contribution of the boundary data alone
  RealField load;       // k * phi_n load; flux of curl2_bc
  NeumannSolver neumann;
  double last_drift = 0.0;

  // Semi-implicit machinery.
  Eigen::SimplicialLDLT<SpMat> a_solver;
  std::vector<long> free_index;  // node -> unknown or -1 on contacts
  std::vector<Eigen::Triplet<cplx>> psi_pattern;
  double psi_rtol = 1e-3;

  Impl(WireDomain dom, CurrentProfile cur, PhysicsParams par, Scheme sch, double step)
      : d(std::move(dom)), J(std::move(cur)), p(par), scheme(sch), dt(step),
        nf(compute_normal_fields(d, J, p.h_ex)), neumann(d.grid) {
    const Grid& g = d.grid;
    Bb.assign(g.num_links(), 0.0);
    for (std::size_t l = 0; l < g.num_links(); ++l)
      if (g.link_on_boundary(l)) {
        const auto [a, b] = g.link_nodes(l);
        Bb[l] = p.kappa * 0.5 * (nf.Bn[a] + nf.Bn[b]);
      }
    RealField zero(g.num_plaquettes(), 0.0);
    curl2_bc = curl_scalar(g, zero, Bb);
    load = flux(g, curl2_bc);
    free_index.assign(g.num_nodes(), -1);
    long m = 0;
    for (std::size_t n = 0; n < g.num_nodes(); ++n)
      if (!g.is_contact(n)) free_index[n] = m++;
    if (scheme == Scheme::SemiImplicit) build_a_solver();
  }

  void build_a_solver() {
    const Grid& g = d.grid;
    const double h = g.h();
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t l = 0; l < g.num_links(); ++l)
      t.emplace_back(long(l), long(l), g.link_weight(l) * h * h);
    // dt c D^T H D with D the plaquette circulation / h and H = h^2.
    const double s = dt * p.c;
    for (std::size_t j = 0; j + 1 < g.ny(); ++j)
      for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
        const long e[4] = {long(g.xlink(i, j)), long(g.ylink(i + 1, j)), long(g.xlink(i, j + 1)),
                           long(g.ylink(i, j))};
        const double sg[4] = {1.0, 1.0, -1.0, -1.0};
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) t.emplace_back(e[a], e[b], s * sg[a] * sg[b]);
      }
    SpMat M(long(g.num_links()), long(g.num_links()));
    M.setFromTriplets(t.begin(), t.end());
    a_solver.compute(M);
    if (a_solver.info() != Eigen::Success) throw LinearSolveError("A-update factorization failed");
  }

  RealField phi_for(std::span<const double> jsup, std::span<const cplx> psi) const {
    // K phi = -flux(W), W = c (g j_s - curl^2 A); the flux of curl^2 A reduces
    // to the boundary data.
    const Grid& g = d.grid;
    RealField f = flux(g, jsup);
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = -p.c * p.g * f[n] + p.c * load[n];
    RealField phi = neumann.solve(f);
    // The additive constant of phi is a gauge choice (omega = C t). Fixing it
    // by int |psi|^2 phi = 0 turns uniformly rotating solutions into
    // stationary ones; in the normal state the zero-mean choice is kept.
    double m2 = 0.0, m2phi = 0.0;
    for (std::size_t n = 0; n < phi.size(); ++n) {
      const double a = g.node_area(n) * std::norm(psi[n]);
      m2 += a;
      m2phi += a * phi[n];
    }
    const double thr = normal_threshold(g);
    if (m2 > thr * thr)
      for (auto& v : phi) v -= m2phi / m2;
    return phi;
  }
};

TdglSystem::TdglSystem(WireDomain domain, CurrentProfile J, PhysicsParams params, Scheme scheme, double dt,
                       double dt_factor) {
  if (!(params.kappa > 0.0) || !(params.c > 0.0) || !(params.g > 0.0))
    throw DomainError("kappa, c and g must be positive");
  if (dt <= 0.0) dt = default_dt(domain.grid, params, scheme, dt_factor);
  impl_ = std::make_unique<Impl>(std::move(domain), std::move(J), params, scheme, dt);
}
TdglSystem::~TdglSystem() = default;
TdglSystem::TdglSystem(TdglSystem&&) noexcept = default;
TdglSystem& TdglSystem::operator=(TdglSystem&&) noexcept = default;

const WireDomain& TdglSystem::domain() const { return impl_->d; }
const Grid& TdglSystem::grid() const { return impl_->d.grid; }
const CurrentProfile& TdglSystem::current() const { return impl_->J; }
const PhysicsParams& TdglSystem::params() const { return impl_->p; }
const NormalFields& TdglSystem::normal() const { return impl_->nf; }
Scheme TdglSystem::scheme() const { return impl_->scheme; }
double TdglSystem::dt() const { return impl_->dt; }
int TdglSystem::projection_interval() const { return impl_->nproj; }
void TdglSystem::set_projection_interval(int n) { impl_->nproj = std::max(1, n); }
const RealField& TdglSystem::boundary_field() const { return impl_->Bb; }

double TdglSystem::default_dt(const Grid& g, const PhysicsParams& p, Scheme s, double factor) {
  const double h2 = g.h() * g.h();
  double m = std::min(1.0 / (p.kappa * p.kappa), 1.0 / (p.c * p.g));
  if (s == Scheme::Explicit) m = std::min({m, h2 / 4.0, h2 / (4.0 * p.c)});
  return factor * m;
}

GLState TdglSystem::normal_state() const {
  const Grid& g = grid();
  GLState s;
  s.psi.assign(g.num_nodes(), cplx(0.0));
  s.A = impl_->nf.An;
  for (auto& a : s.A) a *= impl_->p.kappa;
  s.phi = impl_->nf.phin;
  for (auto& v : s.phi) v *= impl_->p.c * impl_->p.kappa;
  return s;
}

GLState TdglSystem::initial_state(InitialData kind, std::uint64_t seed) const {
  const Grid& g = grid();
  GLState s = normal_state();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (g.is_contact(n)) continue;
    const double y = g.y(g.node_j(n));
    switch (kind) {
      case InitialData::Tapered:
        s.psi[n] = std::min(1.0, std::min(y, g.Ly() - y) / (2.0 * g.h()));
        break;
      case InitialData::Random: {
        const double r = U(rng);
        const double th = 2.0 * 3.141592653589793 * U(rng);
        s.psi[n] = std::polar(r, th);
        break;
      }
      case InitialData::Uniform:
        s.psi[n] = 1.0;
        break;
      case InitialData::Normal:
        break;
    }
  }
  s.phi = solve_phi(s);
  return s;
}

RealField TdglSystem::supercurrent(const GLState& s) const {
  const auto U = link_phases(grid(), s.A, impl_->p.kappa);
  return supercurrent_links(grid(), s.psi, U, impl_->p.kappa);
}

RealField TdglSystem::field(const GLState& s) const { return curl(grid(), s.A); }

RealField TdglSystem::solve_phi(const GLState& s) const { return impl_->phi_for(supercurrent(s), s.psi); }

Observables TdglSystem::observables(const GLState& s) const {
  const Grid& g = grid();
  Observables o;
  double l2 = 0.0, l4 = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double m2 = std::norm(s.psi[n]);
    l2 += g.node_area(n) * m2;
    l4 += g.node_area(n) * m2 * m2;
    o.psi_sup = std::max(o.psi_sup, std::sqrt(m2));
  }
  o.psi_l2 = std::sqrt(l2);
  o.psi_l4 = std::pow(l4, 0.25);
  const auto U = link_phases(g, s.A, impl_->p.kappa);
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    o.kinetic += g.link_weight(l) * std::norm(U[l] * s.psi[b] - s.psi[a]);
  }
  const auto js = supercurrent_links(g, s.psi, U, impl_->p.kappa);
  const std::size_t jc = (g.ny() - 1) / 2;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const auto l = g.ylink(i, jc);
    o.cut_flux += g.link_weight(l) * g.h() * js[l];
  }
  return o;
}

StepReport TdglSystem::step(GLState& s) {
  Impl& I = *impl_;
  const Grid& g = I.d.grid;
  const PhysicsParams& p = I.p;
  const double dt = I.dt;
  const double k = p.kappa;

  const auto U = link_phases(g, s.A, k);
  const auto js = supercurrent_links(g, s.psi, U, k);
  s.phi = I.phi_for(js, s.psi);
  const RealField gphi = gradient(g, s.phi);

  StepReport rep;
  rep.dt_used = dt;

  // Order parameter.
  ComplexField psi_new(g.num_nodes(), cplx(0.0));
  if (I.scheme == Scheme::Explicit) {
    const auto lap = cov_flux(g, s.psi, U);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
      if (g.is_contact(n)) continue;
      const cplx z = s.psi[n];
      const cplx num = z + dt * (lap[n] / g.node_area(n) + k * k * (1.0 - std::norm(z)) * z);
      psi_new[n] = num / cplx(1.0, k * s.phi[n] * dt);
    }
  } else {
    auto& T = I.psi_pattern;
    T.clear();
    const long m = *std::max_element(I.free_index.begin(), I.free_index.end()) + 1;
    Eigen::VectorXcd rhs(m);
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
      const long r = I.free_index[n];
      if (r < 0) continue;
      const double area = g.node_area(n);
      const cplx z = s.psi[n];
      T.emplace_back(r, r, area * cplx(1.0, k * s.phi[n] * dt));
      rhs[r] = area * (z + dt * k * k * (1.0 - std::norm(z)) * z);
    }
    for (std::size_t l = 0; l < g.num_links(); ++l) {
      const auto [a, b] = g.link_nodes(l);
      const double w = dt * g.link_weight(l);
      const long ra = I.free_index[a], rb = I.free_index[b];
      if (ra >= 0) T.emplace_back(ra, ra, w);
      if (rb >= 0) T.emplace_back(rb, rb, w);
      if (ra >= 0 && rb >= 0) {
        T.emplace_back(ra, rb, -w * U[l]);
        T.emplace_back(rb, ra, -w * std::conj(U[l]));
      }
    }
    SpMatC M(m, m);
    M.setFromTriplets(T.begin(), T.end());
    // Solve for the increment. The residual of the current psi is O(dt |psi_t|),
    // so a relative tolerance on it keeps the scheme's fixed points exact
    // (the increment vanishes there) at a fraction of the cost of a full solve.
    // The matrix is diagonally dominant by the node area; Jacobi-preconditioned
    // BiCGSTAB is enough.
    Eigen::VectorXcd x(m);
    for (std::size_t n = 0; n < g.num_nodes(); ++n)
      if (I.free_index[n] >= 0) x[I.free_index[n]] = s.psi[n];
    const Eigen::VectorXcd r0 = rhs - M * x;
    if (r0.norm() > 1e-15 * rhs.norm()) {
      Eigen::BiCGSTAB<SpMatC, Eigen::DiagonalPreconditioner<cplx>> solver;
      solver.setTolerance(I.psi_rtol);
      solver.setMaxIterations(1000);
      solver.compute(M);
      const Eigen::VectorXcd dx = solver.solve(r0);
      if (solver.info() != Eigen::Success) throw LinearSolveError("psi-update iteration did not converge");
      x += dx;
    }
    for (std::size_t n = 0; n < g.num_nodes(); ++n)
      if (I.free_index[n] >= 0) psi_new[n] = x[I.free_index[n]];
  }

  // Magnetic potential.
  RealField A_new(g.num_links());
  if (I.scheme == Scheme::Explicit) {
    const RealField c2 = curl_scalar(g, curl(g, s.A), I.Bb);
    for (std::size_t l = 0; l < g.num_links(); ++l)
      A_new[l] = s.A[l] + dt * (p.c * (p.g * js[l] - c2[l]) - gphi[l]);
  } else {
    const double h2 = g.h() * g.h();
    Eigen::VectorXd rhs(long(g.num_links()));
    for (std::size_t l = 0; l < g.num_links(); ++l)
      rhs[long(l)] = g.link_weight(l) * h2 *
                     (s.A[l] + dt * (p.c * p.g * js[l] - gphi[l] - p.c * I.curl2_bc[l]));
    Eigen::VectorXd x = I.a_solver.solve(rhs);
    for (std::size_t l = 0; l < g.num_links(); ++l) A_new[l] = x[long(l)];
  }

  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double d = std::abs(psi_new[n] - s.psi[n]);
    if (!std::isfinite(d) || std::abs(psi_new[n]) > 1e3)
      throw BlowupError("order parameter diverged at step " + std::to_string(s.step + 1), s.step + 1);
    rep.dpsi_inf = std::max(rep.dpsi_inf, d);
  }
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const double d = std::abs(A_new[l] - s.A[l]);
    if (!std::isfinite(d) || std::abs(A_new[l]) > 1e12)
      throw BlowupError("magnetic potential diverged at step " + std::to_string(s.step + 1), s.step + 1);
    rep.dA_inf = std::max(rep.dA_inf, d);
  }
  s.psi = std::move(psi_new);
  s.A = std::move(A_new);
  s.t += dt;
  s.step += 1;
  if (I.nproj > 0 && s.step % I.nproj == 0) project_coulomb(s);
  rep.div_drift = I.last_drift;
  rep.obs = observables(s);
  return rep;
}

void TdglSystem::project_coulomb(GLState& s) const {
  const Grid& g = grid();
  const RealField f = flux(g, s.A);
  double drift = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n) drift = std::max(drift, std::abs(f[n]) / g.node_area(n));
  impl_->last_drift = drift;
  RealField rhs(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) rhs[n] = -f[n];
  const RealField omega = impl_->neumann.solve(rhs);
  // A - grad omega with the compensating phase keeps every gauge-invariant
  // quantity fixed.
  RealField neg(omega.size());
  for (std::size_t n = 0; n < omega.size(); ++n) neg[n] = -omega[n];
  gauge_transform(s, g, neg, impl_->p.kappa);
}

void gauge_transform(GLState& s, const Grid& g, std::span<const double> omega, double kappa,
                     std::span<const double> omega_t) {
  const RealField go = gradient(g, omega);
  for (std::size_t l = 0; l < s.A.size(); ++l) s.A[l] += go[l];
  for (std::size_t n = 0; n < s.psi.size(); ++n) s.psi[n] *= std::polar(1.0, kappa * omega[n]);
  if (!omega_t.empty())
    for (std::size_t n = 0; n < s.phi.size(); ++n) s.phi[n] -= omega_t[n];
}

ResidualReport TdglSystem::residual(const GLState& s) const {
  const Impl& I = *impl_;
  const Grid& g = grid();
  const PhysicsParams& p = I.p;
  const double k = p.kappa, h = g.h();
  ResidualReport r;

  const auto U = link_phases(g, s.A, k);
  const auto lap = cov_flux(g, s.psi, U);
  double n_lap = 0, n_phi = 0, n_nl = 0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (g.is_contact(n)) {
      r.contact_psi = std::max(r.contact_psi, std::abs(s.psi[n]));
      continue;
    }
    const double a = g.node_area(n);
    const cplx z = s.psi[n];
    const cplx L = lap[n] / a;
    const cplx P = cplx(0.0, k * s.phi[n]) * z;
    const cplx N = k * k * (1.0 - std::norm(z)) * z;
    r.psi_eq += a * std::norm(-L + P - N);
    n_lap += a * std::norm(L);
    n_phi += a * std::norm(P);
    n_nl += a * std::norm(N);
  }
  r.psi_eq = std::sqrt(r.psi_eq);
  const double psi_scale = std::sqrt(n_lap) + std::sqrt(n_phi) + std::sqrt(n_nl);
  r.psi_eq_rel = psi_scale > 0.0 ? r.psi_eq / psi_scale : 0.0;

  const auto js = supercurrent_links(g, s.psi, U, k);
  const auto gphi = gradient(g, s.phi);
  const auto c2 = curl_scalar(g, curl(g, s.A), I.Bb);
  double a1 = 0, a2 = 0, a3 = 0;
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    if (g.link_on_boundary(l)) continue;
    const double t1 = gphi[l] / p.c, t2 = c2[l], t3 = p.g * js[l];
    r.A_eq += h * h * sq(t1 + t2 - t3);
    a1 += h * h * t1 * t1;
    a2 += h * h * t2 * t2;
    a3 += h * h * t3 * t3;
  }
  r.A_eq = std::sqrt(r.A_eq);
  const double a_scale = std::sqrt(a1) + std::sqrt(a2) + std::sqrt(a3);
  r.A_eq_rel = a_scale > 0.0 ? r.A_eq / a_scale : 0.0;

  // One-sided second-order normal derivatives (outward).
  const std::size_t nx = g.nx(), ny = g.ny();
  auto dn = [&](double u0, double u1, double u2) { return (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * h); };
  double jnorm = 0.0;
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double jb = current_at(g, I.J, i, 0), jt = current_at(g, I.J, i, ny - 1);
    const double rb = dn(s.phi[g.node(i, 0)], s.phi[g.node(i, 1)], s.phi[g.node(i, 2)]) + p.c * k * jb;
    const double rt =
        dn(s.phi[g.node(i, ny - 1)], s.phi[g.node(i, ny - 2)], s.phi[g.node(i, ny - 3)]) + p.c * k * jt;
    r.contact_phi += h * (rb * rb + rt * rt);
    jnorm += h * (jb * jb + jt * jt);
  }
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    const double rl = dn(s.phi[g.node(0, j)], s.phi[g.node(1, j)], s.phi[g.node(2, j)]);
    const double rr = dn(s.phi[g.node(nx - 1, j)], s.phi[g.node(nx - 2, j)], s.phi[g.node(nx - 3, j)]);
    r.insulator_phi += h * (rl * rl + rr * rr);
    // Covariant normal derivative of psi: transport the inner values to the wall.
    const cplx l0 = s.psi[g.node(0, j)];
    const cplx l1 = U[g.xlink(0, j)] * s.psi[g.node(1, j)];
    const cplx l2 = U[g.xlink(0, j)] * U[g.xlink(1, j)] * s.psi[g.node(2, j)];
    const cplx r0 = s.psi[g.node(nx - 1, j)];
    const cplx r1 = std::conj(U[g.xlink(nx - 2, j)]) * s.psi[g.node(nx - 2, j)];
    const cplx r2 = std::conj(U[g.xlink(nx - 2, j)]) * std::conj(U[g.xlink(nx - 3, j)]) * s.psi[g.node(nx - 3, j)];
    const cplx dl = (3.0 * l0 - 4.0 * l1 + l2) / (2.0 * h);
    const cplx dr = (3.0 * r0 - 4.0 * r1 + r2) / (2.0 * h);
    r.insulator_psi += h * (std::norm(dl) + std::norm(dr));
  }
  r.contact_phi = std::sqrt(r.contact_phi);
  r.insulator_phi = std::sqrt(r.insulator_phi);
  r.insulator_psi = std::sqrt(r.insulator_psi);
  const double bc_scale = p.c * k * std::sqrt(jnorm);
  const double bc = std::hypot(r.contact_phi, r.insulator_phi);
  r.bc_rel = bc_scale > 0.0 ? bc / bc_scale : bc;

  RealField bnode(g.num_nodes(), 0.0);
  for (auto n : g.boundary_nodes()) bnode[n] = k * I.nf.Bn[n];
  r.circulation = std::abs(boundary_mean(g, bnode) - k * p.h_ex);
  return r;
}

IdentityReport TdglSystem::steady_identities(const GLState& s) const {
  const Impl& I = *impl_;
  const Grid& g = grid();
  const PhysicsParams& p = I.p;
  const double k = p.kappa;
  IdentityReport r;
  const Observables o = observables(s);
  const double l2sq = o.psi_l2 * o.psi_l2;
  const double l4q = std::pow(o.psi_l4, 4);
  r.scale = k * k * l2sq;
  r.energy = std::abs(o.kinetic + k * k * l4q - k * k * l2sq);
  r.energy_rel = r.scale > 0.0 ? r.energy / r.scale : r.energy;

  // K phi + c g |psi|^2 phi (area) - c k load = 0.
  const auto K = stiffness_matrix(g);
  Eigen::Map<const Eigen::VectorXd> phi(s.phi.data(), long(s.phi.size()));
  Eigen::VectorXd Kphi = K * phi;
  double res = 0, n1 = 0, n2 = 0, n3 = 0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double t1 = Kphi[long(n)];
    const double t2 = p.c * p.g * g.node_area(n) * std::norm(s.psi[n]) * s.phi[n];
    const double t3 = p.c * I.load[n];
    res += sq(t1 + t2 - t3);
    n1 += t1 * t1;
    n2 += t2 * t2;
    n3 += t3 * t3;
  }
  r.potential = std::sqrt(res);
  const double sc = std::sqrt(n1) + std::sqrt(n2) + std::sqrt(n3);
  // With phi ~ 0 (no current) the term norms vanish; fall back to the
  // energy scale so rounding noise is not amplified.
  r.potential_rel = sc > 1e-12 * r.scale ? r.potential / sc : (r.scale > 0.0 ? r.potential / r.scale : r.potential);

  double orth = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) orth += g.node_area(n) * std::norm(s.psi[n]) * s.phi[n];
  r.orthogonality = std::abs(orth);
  return r;
}

ConvergenceReport TdglSystem::run_to_steady(GLState& s, double tol, double t_max,
                                            const std::function<void(const GLState&, const StepReport&)>& observer) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  ConvergenceReport rep;
  const long start = s.step;
  while (s.t < t_max) {
    const StepReport sr = step(s);
    if (observer) observer(s, sr);
    rep.final_rate = std::max(sr.dpsi_inf, sr.dA_inf) / sr.dt_used;
    if (rep.final_rate < tol) {
      rep.status = ConvergenceReport::Status::Converged;
      break;
    }
  }
  // Leave phi consistent with the final fields.
  s.phi = solve_phi(s);
  rep.steps = s.step - start;
  rep.t = s.t;
  rep.mixed = observables(s).psi_l2 > normal_threshold(grid());
  rep.residual = residual(s);
  return rep;
}

}  // namespace glwire

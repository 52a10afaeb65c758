#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "glwire/errors.hpp"
#include "glwire/tdgl.hpp"

using namespace glwire;

namespace {

constexpr double pi = std::numbers::pi;

TdglSystem wire(std::size_t nx, CurrentProfile (*make)(const Grid&), double kappa, double h_ex = 0.0,
                Scheme s = Scheme::Explicit) {
  auto d = build_wire_domain(1.0, 2.0, nx, 2 * nx - 1);
  auto J = make(d.grid);
  PhysicsParams p;
  p.kappa = kappa;
  p.h_ex = h_ex;
  return TdglSystem(d, J, p, s);
}

CurrentProfile no_current(const Grid& g) { return CurrentProfile::zero(g); }
CurrentProfile cos_current(const Grid& g) { return CurrentProfile::cosine(g, 3.0, 0.5, 0.3); }
CurrentProfile weak_current(const Grid& g) { return CurrentProfile::cosine(g, 0.5, 0.5, 0.0); }

// Smooth gauge function built from a few random Fourier modes.
RealField smooth_omega(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double c[3][3];
  for (auto& row : c)
    for (auto& v : row) v = U(rng);
  RealField w(g.num_nodes());
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double x = g.x(g.node_i(n)), y = g.y(g.node_j(n));
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s += c[a][b] * std::cos(a * pi * x + 0.7 * b) * std::sin(b * pi * y / 2 + 0.3 * a);
    w[n] = s;
  }
  return w;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> moduli(const ComplexField& psi) {
  std::vector<double> m(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) m[i] = std::abs(psi[i]);
  return m;
}

}  // namespace

TEST_CASE("normal state is a second-order stationary point") {
  double prev = 0.0;
  for (std::size_t n : {17u, 33u, 65u}) {
    auto sys = wire(n, cos_current, 8.0);
    auto s = sys.normal_state();
    // Oracle: with psi = 0 the Poisson problem is the normal one scaled by c kappa.
    CHECK(max_diff(sys.solve_phi(s), s.phi) < 1e-10);
    auto r = sys.residual(s);
    CHECK(r.psi_eq == 0.0);
    CHECK(r.contact_psi == 0.0);
    CHECK(r.circulation < 1e-12);
    const double e = std::max(r.A_eq, r.contact_phi);
    if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.8);
    prev = e;
    if (n == 65) CHECK(r.A_eq_rel <= 1e-2);
    auto id = sys.steady_identities(s);
    CHECK(id.energy == 0.0);
    CHECK(id.orthogonality == 0.0);
  }
}

TEST_CASE("pure superconducting state is a fixed point") {
  {
    auto sys = wire(17, no_current, 4.0);
    GLState s = sys.normal_state();
    const auto& g = sys.grid();
    for (std::size_t n = 0; n < g.num_nodes(); ++n) s.psi[n] = g.is_contact(n) ? 0.0 : 1.0;
    // The explicit stencil is local, so nodes more than one cell from the
    // contacts do not move in one step and A stays zero.
    auto before = s;
    auto rep = sys.step(s);
    CHECK(rep.dA_inf < 1e-13);
    const std::size_t jm = g.ny() / 2;
    for (std::size_t i = 0; i < g.nx(); ++i) CHECK(std::abs(s.psi[g.node(i, jm)] - 1.0) < 1e-13);
    CHECK(std::abs(s.t - before.t - sys.dt()) < 1e-15);
  }
}

TEST_CASE("maximum principle for explicit stepping") {
  auto sys = wire(17, cos_current, 8.0, 2.0);
  auto s = sys.initial_state(InitialData::Tapered);
  double sup = 0.0;
  for (int k = 0; k < 400; ++k) sup = std::max(sup, sys.step(s).obs.psi_sup);
  CHECK(sup <= 1.0 + 1e-10);
  auto r = sys.initial_state(InitialData::Random, 7);
  for (int k = 0; k < 200; ++k) CHECK(sys.step(r).obs.psi_sup <= 1.0 + 1e-10);
}

TEST_CASE("gauge covariance of observables and residuals") {
  auto sys = wire(17, cos_current, 4.0, 0.5);
  const auto& g = sys.grid();
  std::mt19937_64 rng(11);
  auto s = sys.initial_state(InitialData::Random, 3);
  for (int k = 0; k < 20; ++k) sys.step(s);
  const auto o = sys.observables(s);
  const auto r = sys.residual(s);
  const auto B = sys.field(s);
  for (int trial = 0; trial < 10; ++trial) {
    auto w = smooth_omega(g, rng);
    GLState t = s;
    gauge_transform(t, g, w, sys.params().kappa);
    const auto ot = sys.observables(t);
    CHECK(ot.psi_l2 == doctest::Approx(o.psi_l2).epsilon(1e-12));
    CHECK(ot.kinetic == doctest::Approx(o.kinetic).epsilon(1e-10));
    CHECK(std::abs(ot.cut_flux - o.cut_flux) < 1e-10);
    CHECK(max_diff(moduli(t.psi), moduli(s.psi)) < 1e-12);
    CHECK(max_diff(sys.field(t), B) < 1e-10);
    const auto rt = sys.residual(t);
    CHECK(std::abs(rt.psi_eq - r.psi_eq) < 1e-10);
    CHECK(std::abs(rt.A_eq - r.A_eq) < 1e-10);
    // One step commutes with a time-independent gauge change.
    GLState a = s, b = t;
    sys.step(a);
    sys.step(b);
    CHECK(max_diff(moduli(a.psi), moduli(b.psi)) < 1e-10);
  }
}

TEST_CASE("Coulomb projection is idempotent and removes the divergence") {
  auto sys = wire(17, cos_current, 4.0);
  const auto& g = sys.grid();
  std::mt19937_64 rng(5);
  auto s = sys.initial_state(InitialData::Random, 1);
  gauge_transform(s, g, smooth_omega(g, rng), 4.0);
  sys.project_coulomb(s);
  for (double v : divergence(g, s.A)) CHECK(std::abs(v) < 1e-9);
  GLState t = s;
  sys.project_coulomb(t);
  CHECK(max_diff(t.A, s.A) < 1e-12);
  double dpsi = 0.0;
  for (std::size_t n = 0; n < s.psi.size(); ++n) dpsi = std::max(dpsi, std::abs(t.psi[n] - s.psi[n]));
  CHECK(dpsi < 1e-12);
}

TEST_CASE("oversized explicit step blows up with a step index") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  PhysicsParams p;
  p.kappa = 8.0;
  TdglSystem sys(d, CurrentProfile::cosine(d.grid, 1.0, 0.5, 0.0), p, Scheme::Explicit, 0.0, 10.0);
  auto s = sys.initial_state(InitialData::Tapered);
  long at = -1;
  try {
    for (int k = 0; k < 100000; ++k) sys.step(s);
  } catch (const BlowupError& e) {
    at = e.step();
  }
  CHECK(at > 0);
}

TEST_CASE("restart from a copied state is bit-exact") {
  auto sys = wire(17, cos_current, 4.0);
  auto a = sys.initial_state(InitialData::Random, 9);
  for (int k = 0; k < 15; ++k) sys.step(a);
  GLState b = a;
  for (int k = 0; k < 15; ++k) {
    sys.step(a);
    sys.step(b);
  }
  CHECK(a.psi == b.psi);
  CHECK(a.A == b.A);
  CHECK(a.phi == b.phi);
}

TEST_CASE("steady states satisfy the discrete identities") {
  // Oracle: testing the stationary psi-equation with conj(psi) gives the
  // energy identity (real part) and the orthogonality of phi (imaginary part);
  // the Poisson equation then holds with the steady supercurrent.
  for (auto make : {no_current, weak_current}) {
    auto sys = wire(17, make, 4.0, 0.3, Scheme::SemiImplicit);
    auto s = sys.initial_state(InitialData::Tapered);
    auto rep = sys.run_to_steady(s, 1e-9, 200.0);
    REQUIRE(rep.status == ConvergenceReport::Status::Converged);
    CHECK(rep.mixed);
    auto id = sys.steady_identities(s);
    CHECK(id.energy_rel < 1e-6);
    CHECK(id.potential_rel < 1e-6);
    CHECK(id.orthogonality < 1e-8 * id.scale);
    CHECK(rep.residual.psi_eq_rel < 1e-6);
  }
}

TEST_CASE("explicit and semi-implicit schemes share fixed points") {
  auto ex = wire(17, weak_current, 4.0, 0.3, Scheme::Explicit);
  auto im = wire(17, weak_current, 4.0, 0.3, Scheme::SemiImplicit);
  auto a = ex.initial_state(InitialData::Tapered);
  auto b = im.initial_state(InitialData::Tapered);
  REQUIRE(ex.run_to_steady(a, 1e-8, 200.0).status == ConvergenceReport::Status::Converged);
  REQUIRE(im.run_to_steady(b, 1e-8, 200.0).status == ConvergenceReport::Status::Converged);
  CHECK(max_diff(moduli(a.psi), moduli(b.psi)) < 1e-6);
  CHECK(max_diff(ex.field(a), im.field(b)) < 1e-6);
}

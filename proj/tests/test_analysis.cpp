#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "glwire/analysis.hpp"
#include "glwire/errors.hpp"

using namespace glwire;

namespace {

constexpr double pi = std::numbers::pi;

Mask interior_mask(const Grid& g) {
  Mask m(g.num_nodes(), 0);
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) m[g.node(i, j)] = 1;
  return m;
}

RealField x_distance(const Grid& g) {
  RealField d(g.num_nodes());
  for (std::size_t n = 0; n < g.num_nodes(); ++n) d[n] = g.x(g.node_i(n));
  return d;
}

// Vertical strip |x - 1/2| < w.
Mask strip(const Grid& g, double w) {
  Mask m(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) m[n] = std::abs(g.x(g.node_i(n)) - 0.5) < w;
  return m;
}

SweepRow row(double k, double l2, bool mixed = true) {
  SweepRow r;
  r.param = k;
  r.ok = true;
  r.psi_l2 = l2;
  r.mixed = mixed;
  return r;
}

}  // namespace

TEST_CASE("planted exponential is recovered exactly") {
  auto d = build_wire_domain(1.0, 1.0, 33, 33);
  const auto& g = d.grid;
  const auto dist = x_distance(g);
  RealField rho(g.num_nodes());
  for (std::size_t n = 0; n < rho.size(); ++n) rho[n] = std::exp(-2.0 * 3.0 * dist[n]);
  const auto f = fit_decay(g, rho, interior_mask(g), dist, 2.0, 0.25);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.d_min > 2 * g.h());
  // Agmon integral against a direct sum.
  double ref = 0.0;
  for (std::size_t n = 0; n < rho.size(); ++n)
    if (interior_mask(g)[n]) ref += g.node_area(n) * std::exp(2.0 * dist[n]) * rho[n];
  CHECK(f.agmon_integral == doctest::Approx(ref).epsilon(1e-12));
  CHECK(f.agmon_scaled == doctest::Approx(ref * 0.125).epsilon(1e-12));
}

TEST_CASE("flat density: zero slope or a degenerate fit") {
  auto d = build_wire_domain(1.0, 1.0, 33, 33);
  const auto& g = d.grid;
  RealField rho(g.num_nodes(), 0.7);
  const auto f = fit_decay(g, rho, interior_mask(g), x_distance(g), 1.0, 0.25);
  CHECK(std::abs(f.slope) < 1e-12);
  RealField flat(g.num_nodes(), 0.5);
  CHECK_THROWS_AS(fit_decay(g, rho, interior_mask(g), flat, 1.0, 0.25), DegenerateFit);
  Mask tiny(g.num_nodes(), 0);
  for (std::size_t i = 0; i < 10; ++i) tiny[g.node(i + 5, 5)] = 1;
  CHECK_THROWS_AS(fit_decay(g, rho, tiny, x_distance(g), 1.0, 0.25), EmptyRegion);
}

TEST_CASE("phi_n view shift") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  const auto& g = d.grid;
  const auto nf = compute_normal_fields(d, CurrentProfile::cosine(g, 2.0, 0.5, 0.3), 0.0);
  // Constant density: phi_n already has zero mean.
  const auto v0 = phi_n_view(g, nf.phin, RealField(g.num_nodes(), 0.3));
  CHECK(std::abs(v0.C) < 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  RealField rho(g.num_nodes());
  for (double& r : rho) r = U(rng);
  const auto v = phi_n_view(g, nf.phin, rho);
  CHECK(v.orthogonality_rel <= 1e-12);
  CHECK(v.bound_ok);
  CHECK_THROWS_AS(phi_n_view(g, nf.phin, RealField(g.num_nodes(), 0.0)), ZeroOrderParameter);
}

TEST_CASE("mass fraction") {
  auto d = build_wire_domain(1.0, 1.0, 17, 17);
  const auto& g = d.grid;
  RealField rho(g.num_nodes(), 1.0);
  CHECK(mass_fraction(g, rho, Mask(g.num_nodes(), 1)) == doctest::Approx(1.0));
  // Strip |x - 1/2| < 0.2 holds x = 5/16 .. 11/16, width 6/16 plus half cells: 7/16 of the area.
  CHECK(mass_fraction(g, rho, strip(g, 0.2)) == doctest::Approx(7.0 / 16.0).epsilon(1e-12));
  CHECK(mass_fraction(g, RealField(g.num_nodes(), 0.0), strip(g, 0.2)) == 0.0);
}

TEST_CASE("decay tracker window statistics") {
  auto d = build_wire_domain(1.0, 1.0, 9, 9);
  const auto& g = d.grid;
  DecayTracker zero(g, Mask(g.num_nodes(), 1));
  for (int k = 0; k <= 100; ++k) zero.record(0.1 * k, ComplexField(g.num_nodes(), 0.0));
  const auto z = time_decay_track(zero);
  CHECK(z.limsup == 0.0);
  CHECK(z.drift == 0.0);

  // m(t) = area * a(t)^2 with a periodic amplitude: drift small, limsup at the peak.
  DecayTracker per(g, Mask(g.num_nodes(), 1));
  for (int k = 0; k <= 4000; ++k) {
    const double t = 0.01 * k, a = std::sqrt(1.0 + 0.5 * std::sin(2 * pi * t));
    per.record(t, ComplexField(g.num_nodes(), a));
  }
  const auto p = per.finish();
  CHECK(p.limsup == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(p.window_mean == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(p.horizon_ok);

  DecayTracker grow(g, Mask(g.num_nodes(), 1));
  for (int k = 0; k <= 100; ++k) grow.record(k, ComplexField(g.num_nodes(), std::sqrt(1.0 + k)));
  CHECK_THROWS_AS(time_decay_track(grow), InsufficientHorizon);
}

TEST_CASE("log-log exponent and the calibrated bound") {
  const std::vector<double> k{4, 8, 16, 32};
  std::vector<double> y;
  for (double v : k) y.push_back(3.0 * std::pow(v, -1.0 / 6.0));
  const auto e = loglog_exponent(k, y);
  CHECK(e[0] == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  CHECK(e[1] < 1e-10);

  SweepResult s;
  for (std::size_t i = 0; i < k.size(); ++i) s.rows.push_back(row(k[i], 0.5 * std::pow(k[i], -0.4)));
  check_kappa_bound(s, 1.0);
  CHECK(s.monotone);
  CHECK(s.bound_ok);
  CHECK(s.exponent_fitted);
  CHECK(s.exponent == doctest::Approx(-0.4).epsilon(1e-9));

  SweepResult bad;
  for (double v : k) bad.rows.push_back(row(v, 0.5 * std::pow(v, -0.1)));
  check_kappa_bound(bad, 1.0);
  CHECK(bad.monotone);
  CHECK_FALSE(bad.bound_ok);

  SweepResult normal;
  for (double v : k) normal.rows.push_back(row(v, 0.0, false));
  check_kappa_bound(normal, 1.0);
  CHECK(normal.degenerate);
  CHECK(normal.bound_ok);
  CHECK_FALSE(normal.exponent_fitted);
}

TEST_CASE("comparison problem with vanishing order parameter") {
  auto d = build_wire_domain(1.0, 1.0, 17, 17);
  const auto& g = d.grid;
  // Discretely harmonic field: bilinear 1 + 2x + 3y + xy.
  RealField B(g.num_nodes());
  for (std::size_t n = 0; n < B.size(); ++n) {
    const double x = g.x(g.node_i(n)), y = g.y(g.node_j(n));
    B[n] = 1.0 + 2 * x + 3 * y + x * y;
  }
  const auto w = w_comparison(g, RealField(g.num_nodes(), 0.0), B, 0.1);
  CHECK(w.defect < 1e-12);
  // Full density drives w towards zero inside, so B - 1 - w becomes B - 1 there.
  const auto w2 = w_comparison(g, RealField(g.num_nodes(), 1.0), B, 0.02);
  const auto c = g.node(8, 8);
  CHECK(std::abs(w2.w[c]) < 1e-6);
  CHECK(B[c] - 1.0 - w2.w[c] == doctest::Approx(B[c] - 1.0).epsilon(1e-6));
  CHECK(w2.upper >= B[c] - 1.0 - w2.w[c]);
}

TEST_CASE("large-domain region geometry") {
  auto d = build_wire_domain(1.0, 1.0, 33, 33);
  const auto& g = d.grid;
  const Mask D = strip(g, 0.2);
  const auto dj = insulator_distances(g, D);
  CHECK(dj[0] == doctest::Approx(0.3125));
  CHECK(dj[1] == doctest::Approx(0.3125));
  const auto dist = distance_to_mask(g, D);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double x = g.x(g.node_i(n));
    const double ref = D[n] ? 0.0 : (x < 0.5 ? 0.3125 - x : x - 0.6875);
    CHECK(dist[n] == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(insulator_distances(g, Mask(g.num_nodes(), 0))[0] == std::numeric_limits<double>::infinity());

  // Planted exp(-d/eps) outside D.
  const double eps = 1.0 / 16;
  RealField rho(g.num_nodes());
  for (std::size_t n = 0; n < rho.size(); ++n) rho[n] = std::exp(-2.0 * dist[n] / eps);
  const auto f = agmon_large_domain(g, rho, D, eps, 0.5, 0.25, 0.59);
  CHECK(f.slope == doctest::Approx(1.0 / eps).epsilon(1e-6));
  CHECK_THROWS_AS(agmon_large_domain(g, rho, Mask(g.num_nodes(), 0), eps, 0.5, 0.25, 0.59), EmptyRegion);

  // B level set: |B| < delta eps^-gamma.
  RealField B(g.num_nodes());
  for (std::size_t n = 0; n < B.size(); ++n) B[n] = 4.0 * (g.x(g.node_i(n)) - 0.5) * 4.0;
  const Mask L = large_domain_region(B, 0.25, eps, 0.5);
  for (std::size_t n = 0; n < B.size(); ++n) CHECK(bool(L[n]) == (std::abs(B[n]) < 1.0));
}

TEST_CASE("predicted large-domain rate") {
  CHECK(predicted_large_domain_rate(0.25, 0.5, 0.5, 0.6) ==
        doctest::Approx(std::sqrt(0.5 * 0.6 * 2.0 / 2.0) / 0.5).epsilon(1e-14));
}

TEST_CASE("lemma inclusion on the normal state") {
  auto d = build_wire_domain(1.0, 2.0, 33, 65);
  const auto& g = d.grid;
  const auto nf = compute_normal_fields(d, CurrentProfile::constant(g, 4.0), 0.0);
  const double kappa = 16.0;
  RealField field = curl(g, nf.An);
  for (double& b : field) b *= kappa;
  const auto r = lemma31_check(g, nf.Bn, field, kappa, 0.25);
  CHECK(r.n_S > 0);
  CHECK(r.holds);
  // Without the field the inclusion fails on every interior node of S.
  const auto r0 = lemma31_check(g, nf.Bn, RealField(field.size(), 0.0), kappa, 0.25);
  std::size_t interior = 0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (std::abs(nf.Bn[n]) > 1.25 + 0.25 && !g.is_boundary(g.node_i(n), g.node_j(n))) ++interior;
  CHECK(r0.violations == interior);
  CHECK_FALSE(r0.holds);
}

TEST_CASE("wire case smoke runs") {
  WireCase c;
  c.Lx = 1.0;
  c.Ly = 1.0;
  c.nx = 17;
  c.ny = 17;
  c.current.family = "zero";
  // kappa^2 well above the Dirichlet threshold 2 pi^2 of the unit square.
  c.phys.kappa = 6.0;
  c.phys.h_ex = 0.1;
  c.init = InitialData::Uniform;
  c.t_max = 20.0;
  c.tol = 1e-8;
  const auto r = run_wire_case(c);
  CHECK(r.conv.status == ConvergenceReport::Status::Converged);
  CHECK_FALSE(r.averaged);
  CHECK(r.psi_l2 > 0.1);
  CHECK(r.identities.energy_rel < 1e-6);
  REQUIRE(r.phi);
  CHECK(std::abs(r.phi->C) < 1e-12);

  WireCase n = c;
  n.current = CurrentSpec{"constant", 4.0, 0.0, 0.0};
  n.phys.h_ex = 0.0;
  n.init = InitialData::Normal;
  n.t_max = 1.0;
  const auto rn = run_wire_case(n);
  CHECK(rn.psi_l2 == 0.0);
  CHECK(rn.track.limsup == 0.0);
  CHECK_FALSE(rn.phi);

  WireCase bad = c;
  bad.current.family = "sawtooth";
  CHECK_THROWS_AS(run_wire_case(bad), ConfigError);
}

TEST_CASE("h2 target fixes the applied field") {
  WireCase c;
  c.nx = 33;
  c.ny = 17;
  c.current = CurrentSpec{"cosine", 1.25, 0.5, 0.0};
  c.h2_target = 2.0;
  c.phys.kappa = 2.0;
  c.t_max = 0.05;
  const auto r = run_wire_case(c);
  CHECK(r.hj.trace[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("large-domain smoke run keeps the scaled boundary field") {
  LargeDomainParams p;
  p.eps = 0.25;
  p.nx = p.ny = 17;
  p.t_max = 0.5;
  const auto r = large_domain_run(p);
  CHECK(r.kappa == 4.0);
  CHECK(r.g == 16.0);
  CHECK(r.F == doctest::Approx(2.0));
  CHECK(r.b[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(r.b[1] == doctest::Approx(0.5).epsilon(1e-12));
  auto d = build_wire_domain(1.0, 1.0, 17, 17);
  const auto nf = compute_normal_fields(d, CurrentProfile::constant(d.grid, 1.0), 0.0);
  for (auto n : d.grid.boundary_nodes()) CHECK(r.B_eps[n] == doctest::Approx(r.F * nf.Bn[n]).epsilon(1e-12));
  CHECK(count(r.D_delta) > 0);
  CHECK(r.w.residual >= 0.0);
  CHECK_THROWS_AS(large_domain_run(LargeDomainParams{.eps = 1.5}), ConfigError);
}

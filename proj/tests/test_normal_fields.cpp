#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "glwire/errors.hpp"
#include "glwire/normal_fields.hpp"

using namespace glwire;

namespace {

constexpr double pi = std::numbers::pi;

// Smooth, asymmetric contact current: equal and opposite totals, vanishing
// with zero slope at the corners.
CurrentProfile skew_current(const Grid& g, double J0) {
  const double L = g.Lx();
  return CurrentProfile::sampled(
      g, [=](double x) { return J0 * (1.0 - std::cos(2 * pi * x / L)); },
      [=](double x) { return -J0 * (1.0 - std::cos(2 * pi * x / L)) * (1.0 + 0.5 * std::cos(pi * x / L)); });
}

double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace

TEST_CASE("zero current gives the constant field and zero potential") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  auto nf = compute_normal_fields(d, CurrentProfile::zero(d.grid), 1.0);
  for (double b : nf.Bn) CHECK(b == 1.0);
  for (double p : nf.phin) CHECK(p == 0.0);
  for (double b : curl(d.grid, nf.An)) CHECK(b == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(min_grad_Bn(d.grid, nf.Bn) == 0.0);
}

TEST_CASE("symmetric wire boundary constants") {
  auto d = build_wire_domain(1.0, 2.0, 33, 65);
  auto J = CurrentProfile::constant(d.grid, 4.0);
  // Oracle: for J0 on [0,Lx] at both contacts the trace is J0 x on the
  // bottom, J0 Lx on the right side, J0 x on the top and 0 on the left,
  // before the shift; its boundary mean is J0 Lx / 2.
  auto Bn = solve_Bn(d, J, 0.0);
  const auto& g = d.grid;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    CHECK(Bn[g.node(0, j)] == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(Bn[g.node(g.nx() - 1, j)] == doctest::Approx(2.0).epsilon(1e-13));
  }
  auto r = compute_hj(d, J, 0.0);
  CHECK(r.formula[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(r.formula[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.trace[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(r.h == doctest::Approx(2.0));
  CHECK(r.sign_condition);

  auto r5 = compute_hj(d, J, 5.0);
  CHECK(r5.formula[0] == doctest::Approx(3.0));
  CHECK(r5.formula[1] == doctest::Approx(7.0));
  CHECK_FALSE(r5.sign_condition);

  auto B3 = solve_Bn(d, J, 3.0);
  for (std::size_t n = 0; n < Bn.size(); ++n) CHECK(B3[n] - Bn[n] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("formula is independent of the point on each insulating side") {
  auto d = build_wire_domain(1.0, 2.0, 33, 65);
  auto r = compute_hj(d, skew_current(d.grid, 3.0), 0.5);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 3; ++k) CHECK(r.formula_samples[j][k] == doctest::Approx(r.formula[j]).epsilon(1e-12));
}

// Continuum value of the boundary-integral formula by composite Simpson on
// the two contacts, for the cosine current family.
double hj_exact(double Lx, double Ly, double J0, double a, double b, double h_ex, double s_j) {
  const double P = 2 * (Lx + Ly);
  const int M = 20000;
  double acc = 0.0;
  for (int side = 0; side < 2; ++side)
    for (int k = 0; k <= M; ++k) {
      const double x = Lx * k / M;
      const double w = (k == 0 || k == M) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double s = side == 0 ? x : Lx + Ly + (Lx - x);
      const double J = side == 0 ? J0 * (1 + a * std::cos(pi * x / Lx)) : -J0 * (1 + b * std::cos(pi * x / Lx));
      const double ell = std::fmod(s_j - s + P, P);
      acc += w * ell * J;
    }
  acc *= Lx / M / 3.0;
  return h_ex - acc / P;
}

TEST_CASE("formula and trace converge to the continuum value and to each other") {
  std::vector<double> err, gap;
  const double exact[2] = {hj_exact(1, 2, 3.0, 0.5, 0.3, 0.5, 5.0), hj_exact(1, 2, 3.0, 0.5, 0.3, 0.5, 2.0)};
  for (std::size_t n : {17u, 33u, 65u}) {
    auto d = build_wire_domain(1.0, 2.0, n, 2 * n - 1);
    auto r = compute_hj(d, CurrentProfile::cosine(d.grid, 3.0, 0.5, 0.3), 0.5);
    gap.push_back(std::max(std::abs(r.formula[0] - r.trace[0]), std::abs(r.formula[1] - r.trace[1])));
    err.push_back(std::max(std::abs(r.formula[0] - exact[0]), std::abs(r.formula[1] - exact[1])));
  }
  MESSAGE("h_j formula errors: " << err[0] << " " << err[1] << " " << err[2]);
  MESSAGE("h_j formula-trace gaps: " << gap[0] << " " << gap[1] << " " << gap[2]);
  CHECK(order(err[0], err[1]) >= 1.8);
  CHECK(order(err[1], err[2]) >= 1.8);
  CHECK(order(gap[0], gap[1]) >= 1.8);
  CHECK(order(gap[1], gap[2]) >= 1.8);
}

TEST_CASE("potential is antisymmetric for the symmetric wire") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  const auto& g = d.grid;
  auto phi = solve_phin(d, CurrentProfile::constant(g, 4.0));
  double m = 0.0;
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < g.nx(); ++i)
      m = std::max(m, std::abs(phi[g.node(i, j)] + phi[g.node(i, g.ny() - 1 - j)]));
  CHECK(m < 1e-10);
  CHECK(std::abs(mean(g, phi)) < 1e-13);

  auto phi2 = solve_phin(d, CurrentProfile::constant(g, 8.0));
  for (std::size_t n = 0; n < phi.size(); ++n) CHECK(phi2[n] == doctest::Approx(2.0 * phi[n]).epsilon(1e-10));
}

TEST_CASE("incompatible current is rejected") {
  auto d = build_wire_domain(1.0, 1.0, 17, 17);
  CHECK_THROWS_AS(solve_phin(d, CurrentProfile::per_contact(d.grid, 1.0, -0.7)), CompatibilityError);
  CHECK_THROWS_AS(solve_Bn(d, CurrentProfile::per_contact(d.grid, 1.0, -0.7), 0.0), CompatibilityError);
}

TEST_CASE("Coulomb-gauge potential reproduces the plaquette field") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  const auto& g = d.grid;
  RealField ones(g.num_nodes(), 1.0);
  auto A1 = recover_An(g, ones);
  for (double b : curl(g, A1)) CHECK(b == doctest::Approx(1.0).epsilon(1e-11));

  auto Bn = solve_Bn(d, skew_current(g, 2.0), 0.3);
  auto A = recover_An(g, Bn);
  auto Bp = node_to_plaquette(g, Bn);
  auto c = curl(g, A);
  for (std::size_t p = 0; p < c.size(); ++p) CHECK(c[p] == doctest::Approx(Bp[p]).epsilon(1e-10));
  for (double v : divergence(g, A)) CHECK(std::abs(v) < 1e-10);
  RealField zero(g.num_nodes(), 0.0);
  for (double a : recover_An(g, zero)) CHECK(a == 0.0);
}

TEST_CASE("conjugacy residual converges at second order") {
  std::vector<double> r;
  for (std::size_t n : {17u, 33u, 65u}) {
    auto d = build_wire_domain(1.0, 2.0, n, 2 * n - 1);
    auto J = CurrentProfile::cosine(d.grid, 3.0, 0.5, 0.3);
    auto Bn = solve_Bn(d, J, 0.0);
    auto phi = solve_phin(d, J);
    r.push_back(conjugacy_residual(d.grid, Bn, phi));
    // Invariance under additive constants.
    auto B2 = Bn;
    auto p2 = phi;
    for (auto& v : B2) v += 1.7;
    for (auto& v : p2) v -= 0.4;
    CHECK(conjugacy_residual(d.grid, B2, p2) == doctest::Approx(r.back()).epsilon(1e-8));
  }
  MESSAGE("conjugacy residuals: " << r[0] << " " << r[1] << " " << r[2]);
  CHECK(order(r[0], r[1]) >= 1.8);
  CHECK(order(r[1], r[2]) >= 1.8);
}

TEST_CASE("Bn obeys the discrete maximum principle and linearity") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  const auto& g = d.grid;
  auto J = skew_current(g, 2.0);
  auto Bn = solve_Bn(d, J, 0.5);
  double lo = 1e300, hi = -1e300;
  for (auto n : g.boundary_nodes()) {
    lo = std::min(lo, Bn[n]);
    hi = std::max(hi, Bn[n]);
  }
  for (double b : Bn) {
    CHECK(b >= lo - 1e-12);
    CHECK(b <= hi + 1e-12);
  }
  auto B2 = solve_Bn(d, J.scaled(2.0), 1.0);
  for (std::size_t n = 0; n < Bn.size(); ++n) CHECK(B2[n] == doctest::Approx(2.0 * Bn[n]).epsilon(1e-10));
  CHECK(boundary_mean(g, Bn) == doctest::Approx(0.5).epsilon(1e-12));
  const double m1 = min_grad_Bn(g, solve_Bn(d, CurrentProfile::constant(g, 4.0), 0.0));
  const double m2 = min_grad_Bn(g, solve_Bn(d, CurrentProfile::constant(g, 8.0), 0.0));
  CHECK(m1 > 0.0);
  CHECK(m2 == doctest::Approx(2.0 * m1).epsilon(1e-9));
}

TEST_CASE("regions from thresholding") {
  auto d = build_wire_domain(1.0, 2.0, 33, 65);
  const auto& g = d.grid;
  {
    RealField B(g.num_nodes(), 2.0);
    auto r = extract_regions(g, B, 0.5);
    CHECK(count(r.omega[1]) == g.num_nodes());
    CHECK(count(r.S) == g.num_nodes());
    CHECK(r.C[0].empty());
    CHECK(r.C[1].empty());
    CHECK(count(r.omega[0]) == 0);
  }
  auto Bn = solve_Bn(d, CurrentProfile::constant(g, 4.0), 0.0);
  auto r = extract_regions(g, Bn, 0.5);
  CHECK(r.S_components == 2);
  CHECK(count(r.S_j[0]) > 0);
  CHECK(count(r.S_j[1]) > 0);
  // S_{delta,1} hugs x = 0, S_{delta,2} hugs x = Lx.
  CHECK(r.S_j[0][g.node(0, g.ny() / 2)]);
  CHECK(r.S_j[1][g.node(g.nx() - 1, g.ny() / 2)]);
  for (int j = 0; j < 2; ++j)
    for (std::size_t n = 0; n < g.num_nodes(); ++n) {
      if (r.omega_delta[j][n]) CHECK(r.omega[j][n]);
      if (r.omega_delta[j][n]) CHECK(r.S_j[j][n]);
    }
  auto r2 = extract_regions(g, Bn, 0.8);
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (r2.S[n]) CHECK(r.S[n]);
  auto r3 = extract_regions(g, Bn, 1.0);
  CHECK(r3.S_empty);
  // Distances vanish nowhere inside the region but are small at its edge.
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (r.S_j[1][n]) CHECK(r.dist_to_C[1][n] >= 0.0);
}

TEST_CASE("crossing points and distances") {
  Grid g(11, 11, 0.1);
  RealField f(g.num_nodes());
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = g.x(g.node_i(n)) - 0.55;
  auto pts = level_crossings(g, f);
  CHECK(pts.size() == 11);
  for (auto& p : pts) CHECK(p[0] == doctest::Approx(0.55));
  auto dist = distance_to_points(g, pts);
  CHECK(dist[g.node(10, 5)] == doctest::Approx(0.45));
  CHECK(dist[g.node(0, 0)] == doctest::Approx(0.55));
}

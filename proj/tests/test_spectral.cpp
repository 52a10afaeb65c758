#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "glwire/errors.hpp"
#include "glwire/spectral.hpp"

using namespace glwire;

namespace {

constexpr double pi = std::numbers::pi;

// Closed form of the lowest 5-point Dirichlet eigenvalue on an (nx-1)h x (ny-1)h box.
double discrete_dirichlet(double Lx, double Ly, double h) {
  const double sx = std::sin(pi * h / (2 * Lx)), sy = std::sin(pi * h / (2 * Ly));
  return 4.0 / (h * h) * (sx * sx + sy * sy);
}

// Landau gauge (-y, 0): unit curl on every plaquette.
RealField unit_field(const Grid& g) {
  RealField A(g.num_links(), 0.0);
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) A[g.xlink(i, j)] = -g.y(j);
  return A;
}

RealField random_gradient(const Grid& g, std::uint64_t seed, double amp) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  RealField w(g.num_nodes());
  for (double& v : w) v = U(rng);
  return gradient(g, w);
}

Mask full(const Grid& g) { return Mask(g.num_nodes(), 1); }

}  // namespace

TEST_CASE("de Gennes operator at xi = 0 is the even harmonic oscillator") {
  // Even extension of -u'' + t^2 u: ground energy 1.
  CHECK(de_gennes_mu(0.0, 10.0, 0.01).value == doctest::Approx(1.0).epsilon(1e-4));
  // Well far from the wall: also the full-line oscillator.
  CHECK(de_gennes_mu(5.0, 12.0, 0.01).value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("de Gennes constant") {
  const auto r = de_gennes_theta0();
  CHECK(r.theta0 >= 0.58);
  CHECK(r.theta0 <= 0.60);
  // At the minimiser the energy equals xi0^2.
  CHECK(std::abs(r.theta0 - r.xi0 * r.xi0) <= 1e-4);
  CHECK(std::abs(de_gennes_theta0(15.0, 0.01).theta0 - r.theta0) <= 1e-4);
  for (double m : r.mu_scan) CHECK(m >= r.theta0 - 1e-12);
}

TEST_CASE("eigen solver matches the closed-form Dirichlet eigenvalue") {
  for (auto [Lx, Ly, n] : {std::tuple{1.0, 1.0, 17}, std::tuple{2.0, 1.0, 17}}) {
    const double h = Ly / double(n - 1);
    auto d = build_wire_domain(Lx, Ly, std::size_t(std::llround(Lx / h)) + 1, std::size_t(n));
    const auto r = lambda_dirichlet(d.grid);
    CHECK(r.value == doctest::Approx(discrete_dirichlet(Lx, Ly, h)).epsilon(1e-9));
    CHECK(r.residual <= 1e-8);
  }
}

TEST_CASE("curl eigenvalue equals the Dirichlet eigenvalue") {
  for (double Lx : {1.0, 2.0}) {
    const auto p = lambda_vs_lambdaD(Lx, 1.0, 1.0 / 16);
    CHECK(p.lambda == doctest::Approx(p.lambdaD).epsilon(1e-7));
    CHECK(p.lambdaD == doctest::Approx(pi * pi * (1 + 1 / (Lx * Lx))).epsilon(1e-2));
  }
}

TEST_CASE("pure gauge potential reduces to the Dirichlet Laplacian") {
  auto d = build_wire_domain(1.0, 1.0, 17, 17);
  const auto& g = d.grid;
  const auto A = random_gradient(g, 3, 2.0);
  const double lD = lambda_dirichlet(g).value;
  for (double eps : {1.0, 0.3}) {
    const auto r = mu_eps(g, A, full(g), eps, DirichletPart::All);
    CHECK(r.value == doctest::Approx(eps * eps * lD).epsilon(1e-8));
  }
}

TEST_CASE("mu_eps is gauge invariant") {
  auto d = build_wire_domain(1.0, 2.0, 17, 33);
  const auto& g = d.grid;
  const auto A = unit_field(g);
  RealField A2 = A;
  const auto dw = random_gradient(g, 11, 0.5);
  for (std::size_t l = 0; l < A2.size(); ++l) A2[l] += dw[l];
  for (auto part : {DirichletPart::All, DirichletPart::OffInsulators}) {
    const double v1 = mu_eps(g, A, full(g), 0.2, part).value;
    const double v2 = mu_eps(g, A2, full(g), 0.2, part).value;
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-8));
  }
}

TEST_CASE("uniform field: bulk and boundary semiclassical levels") {
  auto d = build_wire_domain(1.0, 2.0, 33, 65);
  const auto& g = d.grid;
  const auto A = unit_field(g);
  double prev = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const double v = mu_eps(g, A, full(g), eps, DirichletPart::All).value / eps;
    CHECK(v > 1.0 - 1e-3);
    if (prev > 0.0) CHECK(v < prev);
    prev = v;
  }
  CHECK(prev == doctest::Approx(1.0).epsilon(0.05));
  // A Neumann edge lowers the level towards the de Gennes constant.
  const double th = de_gennes_theta0().theta0;
  const double vb = mu_eps(g, A, full(g), 0.05, DirichletPart::OffInsulators).value / 0.05;
  CHECK(vb < 0.8);
  CHECK(vb > th - 0.02);
}

TEST_CASE("mu_eps rejects an empty subdomain") {
  auto d = build_wire_domain(1.0, 1.0, 9, 9);
  CHECK_THROWS_AS(mu_eps(d.grid, unit_field(d.grid), Mask(d.grid.num_nodes(), 0), 0.1, DirichletPart::All),
                  DomainError);
}

TEST_CASE("lower bound constant stays bounded") {
  auto d = build_wire_domain(1.0, 2.0, 33, 65);
  const auto& g = d.grid;
  const auto A = unit_field(g);
  // Smooth perturbation a = (sin(pi y), 0).
  RealField a(g.num_links(), 0.0);
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) a[g.xlink(i, j)] = std::sin(pi * g.y(j));
  const double th = de_gennes_theta0().theta0;
  const auto rep = verify_lower_bound(g, A, a, full(g), {0.4, 0.2, 0.1, 0.05}, th);
  CHECK(rep.b == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.b_prime == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.grad_a_inf == doctest::Approx(pi).epsilon(0.01));
  CHECK(rep.bounded);
  for (std::size_t k = 0; k < rep.eps.size(); ++k) CHECK(rep.lhs[k] > 0.0);
}

TEST_CASE("sector ground state: coarse monotonicity and gauge-free residual") {
  SectorProblem p;
  p.R_trunc = 6.0;
  p.h_mesh = 0.15;
  double prev = 1e9;
  for (double alpha : {pi / 4, pi / 2, pi}) {
    p.alpha = alpha;
    const auto r = sector_dn_ground(p);
    CHECK(r.residual <= 1e-8);
    CHECK(r.value <= prev + 1e-9);
    // Above the half-plane constant, below the bulk level.
    CHECK(r.value > 0.58);
    CHECK(r.value < 1.0);
    prev = r.value;
  }
}

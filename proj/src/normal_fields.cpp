#include "glwire/normal_fields.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "glwire/errors.hpp"
#include "glwire/laplace.hpp"

namespace glwire {

namespace {

void require_valid(const WireDomain& d, const CurrentProfile& J) {
  const auto r = validate_current(J, d);
  if (!r.finite) throw CompatibilityError("current profile is not finite or has the wrong size");
  if (!r.zero_total)
    throw CompatibilityError("total current " + std::to_string(r.totals[0] + r.totals[1]) +
                             " is not zero");
}

}  // namespace

RealField bn_boundary_trace(const Grid& g, const CurrentProfile& J, double h_ex) {
  const auto& b = g.boundary_nodes();
  const auto seg = boundary_segment_integrals(g, J);
  std::vector<double> T(b.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    T[k] = acc;
    acc += seg[k];
  }
  double s = 0.0;
  for (double v : T) s += v;
  const double shift = h_ex - s * g.h() / (2.0 * (g.Lx() + g.Ly()));
  RealField out(g.num_nodes(), 0.0);
  for (std::size_t k = 0; k < b.size(); ++k) out[b[k]] = T[k] + shift;
  return out;
}

RealField solve_Bn(const WireDomain& d, const CurrentProfile& J, double h_ex) {
  require_valid(d, J);
  // Extend only the deviation from h_ex; constants are harmonic, so zero
  // current reproduces B_n = h_ex bit for bit.
  RealField dev = bn_boundary_trace(d.grid, J, 0.0);
  const double m = boundary_mean(d.grid, dev);
  for (auto& v : dev) v -= m;
  DirichletSolver solver(d.grid);
  RealField B = solver.solve(dev);
  for (auto& v : B) v += h_ex;
  return B;
}

RealField phin_load(const Grid& g, const CurrentProfile& J) {
  const auto& b = g.boundary_nodes();
  const auto seg = boundary_segment_integrals(g, J);
  const std::size_t N = b.size();
  RealField f(g.num_nodes(), 0.0);
  for (std::size_t k = 0; k < N; ++k) f[b[k]] = -0.5 * (seg[(k + N - 1) % N] + seg[k]);
  return f;
}

RealField solve_phin(const WireDomain& d, const CurrentProfile& J) {
  require_valid(d, J);
  NeumannSolver solver(d.grid);
  return solver.solve(phin_load(d.grid, J));
}

RealField recover_An(const Grid& g, std::span<const double> Bn) {
  const RealField Bp = node_to_plaquette(g, Bn);
  DualDirichletSolver solver(g);
  const RealField chi = solver.solve(Bp);
  const std::size_t px = g.nx() - 1, py = g.ny() - 1;
  const double h = g.h();
  auto at = [&](long i, long j, long i_in, long j_in) {
    // Odd reflection across the boundary for plaquettes outside the grid.
    if (i < 0 || j < 0 || i >= long(px) || j >= long(py)) return -chi[g.plaquette(i_in, j_in)];
    return chi[g.plaquette(std::size_t(i), std::size_t(j))];
  };
  RealField A(g.num_links());
  for (std::size_t j = 0; j < g.ny(); ++j)
    for (std::size_t i = 0; i < px; ++i) {
      const long jj = long(j);
      const long jin = std::min<long>(jj, long(py) - 1);
      const double above = at(long(i), jj, long(i), jin);
      const double below = at(long(i), jj - 1, long(i), std::max<long>(jj - 1, 0));
      A[g.xlink(i, j)] = -(above - below) / h;
    }
  for (std::size_t j = 0; j < py; ++j)
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const long ii = long(i);
      const double right = at(ii, long(j), std::min<long>(ii, long(px) - 1), long(j));
      const double left = at(ii - 1, long(j), std::max<long>(ii - 1, 0), long(j));
      A[g.ylink(i, j)] = (right - left) / h;
    }
  return A;
}

NormalFields compute_normal_fields(const WireDomain& d, const CurrentProfile& J, double h_ex) {
  NormalFields nf;
  nf.h_ex = h_ex;
  nf.Bn = solve_Bn(d, J, h_ex);
  nf.phin = solve_phin(d, J);
  nf.An = recover_An(d.grid, nf.Bn);
  const auto& g = d.grid;
  nf.h1 = nf.Bn[g.node(0, g.ny() / 2)];
  nf.h2 = nf.Bn[g.node(g.nx() - 1, g.ny() / 2)];
  nf.h = std::max(std::abs(nf.h1), std::abs(nf.h2));
  return nf;
}

double hj_formula_at(const WireDomain& d, const CurrentProfile& J, double h_ex, double s) {
  const Grid& g = d.grid;
  const auto& b = g.boundary_nodes();
  const std::size_t N = b.size();
  const double h = g.h();
  double integral = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const auto n0 = b[k], n1 = b[(k + 1) % N];
    const auto j0 = g.node_j(n0);
    if (j0 != g.node_j(n1) || !(j0 == 0 || j0 + 1 == g.ny())) continue;
    const auto i0 = g.node_i(n0), i1 = g.node_i(n1);
    // s lies strictly inside an insulating side, so the length from the
    // segment end is l0 - h without wraparound.
    const double l0 = boundary_portion_length(d.spec, g.arclength(i0, j0), s);
    const double l1 = l0 - h;
    integral += 0.5 * h * (l0 * current_at(g, J, i0, j0) + l1 * current_at(g, J, i1, j0));
  }
  return h_ex - integral / d.spec.perimeter();
}

HjReport compute_hj(const WireDomain& d, const CurrentProfile& J, double h_ex) {
  const Grid& g = d.grid;
  const DomainSpec& sp = d.spec;
  HjReport r;
  const RealField trace = bn_boundary_trace(g, J, h_ex);
  r.trace = {trace[g.node(0, g.ny() / 2)], trace[g.node(g.nx() - 1, g.ny() / 2)]};
  const double fr[3] = {0.25, 0.5, 0.75};
  for (int k = 0; k < 3; ++k) {
    // Left side runs downward in the counterclockwise sense.
    const double s_left = 2.0 * sp.Lx + sp.Ly + fr[k] * sp.Ly;
    const double s_right = sp.Lx + fr[k] * sp.Ly;
    r.formula_samples[0][k] = hj_formula_at(d, J, h_ex, s_left);
    r.formula_samples[1][k] = hj_formula_at(d, J, h_ex, s_right);
  }
  r.formula = {r.formula_samples[0][1], r.formula_samples[1][1]};
  r.h = std::max(std::abs(r.formula[0]), std::abs(r.formula[1]));
  r.sign_condition = r.formula[0] * r.formula[1] < 0.0;
  return r;
}

double conjugacy_residual(const Grid& g, std::span<const double> Bn, std::span<const double> phin) {
  const double h2 = 2.0 * g.h();
  double r = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const double px = (phin[g.node(i + 1, j)] - phin[g.node(i - 1, j)]) / h2;
      const double py = (phin[g.node(i, j + 1)] - phin[g.node(i, j - 1)]) / h2;
      const double bx = (Bn[g.node(i + 1, j)] - Bn[g.node(i - 1, j)]) / h2;
      const double by = (Bn[g.node(i, j + 1)] - Bn[g.node(i, j - 1)]) / h2;
      r = std::max(r, std::abs(px + by) + std::abs(py - bx));
    }
  return r;
}

double min_grad_Bn(const Grid& g, std::span<const double> Bn) {
  const double h2 = 2.0 * g.h();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const double bx = (Bn[g.node(i + 1, j)] - Bn[g.node(i - 1, j)]) / h2;
      const double by = (Bn[g.node(i, j + 1)] - Bn[g.node(i, j - 1)]) / h2;
      m = std::min(m, std::hypot(bx, by));
    }
  return m;
}

std::size_t count(const Mask& m) {
  std::size_t c = 0;
  for (auto v : m) c += v != 0;
  return c;
}

std::size_t count_components(const Grid& g, const Mask& m) {
  std::vector<std::uint8_t> seen(m.size(), 0);
  std::size_t comps = 0;
  std::deque<std::size_t> q;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (!m[s] || seen[s]) continue;
    ++comps;
    seen[s] = 1;
    q.push_back(s);
    while (!q.empty()) {
      const auto n = q.front();
      q.pop_front();
      const auto i = g.node_i(n), j = g.node_j(n);
      auto visit = [&](std::size_t nb) {
        if (m[nb] && !seen[nb]) {
          seen[nb] = 1;
          q.push_back(nb);
        }
      };
      if (i > 0) visit(g.node(i - 1, j));
      if (i + 1 < g.nx()) visit(g.node(i + 1, j));
      if (j > 0) visit(g.node(i, j - 1));
      if (j + 1 < g.ny()) visit(g.node(i, j + 1));
    }
  }
  return comps;
}

std::vector<Point> level_crossings(const Grid& g, std::span<const double> f) {
  std::vector<Point> pts;
  for (std::size_t l = 0; l < g.num_links(); ++l) {
    const auto [a, b] = g.link_nodes(l);
    const bool ia = f[a] > 0.0, ib = f[b] > 0.0;
    if (ia == ib) continue;
    const double t = f[a] / (f[a] - f[b]);
    const double xa = g.x(g.node_i(a)), ya = g.y(g.node_j(a));
    const double xb = g.x(g.node_i(b)), yb = g.y(g.node_j(b));
    pts.push_back({xa + t * (xb - xa), ya + t * (yb - ya)});
  }
  return pts;
}

RealField distance_to_points(const Grid& g, const std::vector<Point>& pts) {
  RealField d(g.num_nodes(), std::numeric_limits<double>::infinity());
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double x = g.x(g.node_i(n)), y = g.y(g.node_j(n));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, (x - p[0]) * (x - p[0]) + (y - p[1]) * (y - p[1]));
    d[n] = std::sqrt(best);
  }
  return d;
}

RegionMasks extract_regions(const Grid& g, std::span<const double> Bn, double delta) {
  RegionMasks r;
  r.delta = delta;
  const std::size_t N = g.num_nodes();
  r.S.assign(N, 0);
  for (int j = 0; j < 2; ++j) {
    const double sgn = j == 0 ? -1.0 : 1.0;
    r.omega[j].assign(N, 0);
    r.S_j[j].assign(N, 0);
    r.omega_delta[j].assign(N, 0);
    RealField fS(N), fO(N);
    for (std::size_t n = 0; n < N; ++n) {
      const double x = g.x(g.node_i(n));
      const double d_ins = std::min(x, g.Lx() - x);
      const double v = sgn * Bn[n];
      fS[n] = v - (1.0 + delta);
      fO[n] = std::min(fS[n], d_ins - delta);
      r.omega[j][n] = v > 1.0;
      r.S_j[j][n] = fS[n] > 0.0;
      r.omega_delta[j][n] = fO[n] > 0.0;
      if (r.S_j[j][n]) r.S[n] = 1;
    }
    r.C[j] = level_crossings(g, fS);
    r.Gamma[j] = level_crossings(g, fO);
    r.dist_to_C[j] = distance_to_points(g, r.C[j]);
    r.dist_to_Gamma[j] = distance_to_points(g, r.Gamma[j]);
  }
  r.S_components = count_components(g, r.S);
  r.S_empty = count(r.S) == 0;
  return r;
}

}  // namespace glwire

#include "glwire/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "glwire/errors.hpp"
#include "glwire/laplace.hpp"
#include "glwire/spectral.hpp"

namespace glwire {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Accumulates dt-weighted node and plaquette fields over the trailing window.
struct WindowAverage {
  double t_start = 0.0;
  double weight = 0.0;
  RealField rho, field;

  void add(const GLState& s, const RealField& f, double dt) {
    if (s.t <= t_start) return;
    if (rho.empty()) {
      rho.assign(s.psi.size(), 0.0);
      field.assign(f.size(), 0.0);
    }
    for (std::size_t n = 0; n < rho.size(); ++n) rho[n] += dt * std::norm(s.psi[n]);
    for (std::size_t p = 0; p < field.size(); ++p) field[p] += dt * f[p];
    weight += dt;
  }
  void finish() {
    for (double& v : rho) v /= weight;
    for (double& v : field) v /= weight;
  }
};

}  // namespace

CurrentProfile make_current(const Grid& g, const CurrentSpec& s) {
  if (s.family == "zero") return CurrentProfile::zero(g);
  if (s.family == "constant") return CurrentProfile::constant(g, s.J0);
  if (s.family == "bump") return CurrentProfile::bump(g, s.J0);
  if (s.family == "cosine") return CurrentProfile::cosine(g, s.J0, s.a, s.b);
  throw ConfigError("unknown current family '" + s.family + "'");
}

RealField density(std::span<const cplx> psi) {
  RealField r(psi.size());
  for (std::size_t n = 0; n < psi.size(); ++n) r[n] = std::norm(psi[n]);
  return r;
}

double mass_fraction(const Grid& g, std::span<const double> rho, const Mask& mask) {
  double tot = 0.0, in = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double w = g.node_area(n) * rho[n];
    tot += w;
    if (mask[n]) in += w;
  }
  return tot > 0.0 ? in / tot : 0.0;
}

DecayFit fit_decay(const Grid& g, std::span<const double> rho, const Mask& region, std::span<const double> dist,
                   double weight_rate, double delta) {
  if (count(region) < 20) throw EmptyRegion("decay region has fewer than 20 nodes");
  const double h = g.h(), Ly = g.Ly();
  DecayFit f;
  f.d_min = inf;
  f.d_max = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t np = 0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (!region[n] || !std::isfinite(dist[n])) continue;
    f.agmon_integral += g.node_area(n) * std::exp(weight_rate * dist[n]) * rho[n];
    const double y = g.y(g.node_j(n));
    if (rho[n] <= 1e-300 || dist[n] <= 2 * h) continue;
    if (y <= 2 * h + 1e-12 || y >= Ly - 2 * h - 1e-12) continue;
    const double X = -2.0 * dist[n], Y = std::log(rho[n]);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    syy += Y * Y;
    ++np;
    f.d_min = std::min(f.d_min, dist[n]);
    f.d_max = std::max(f.d_max, dist[n]);
  }
  f.agmon_scaled = f.agmon_integral * std::pow(delta, 1.5);
  f.n_points = np;
  const double N = double(np);
  const double vx = N * sxx - sx * sx, vy = N * syy - sy * sy, cxy = N * sxy - sx * sy;
  if (np < 3 || !(f.d_max - f.d_min > 1e-12 * std::max(1.0, f.d_max)) || !(vx > 0.0))
    throw DegenerateFit("decay fit has no spread in distance");
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / N;
  f.r_squared = vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 0.0;
  return f;
}

DecayFit agmon_fit(const Grid& g, std::span<const double> rho, const RegionMasks& m, int j, double kappa,
                   DecayReference ref) {
  if (j != 1 && j != 2) throw DomainError("region index must be 1 or 2");
  const auto k = std::size_t(j - 1);
  const double rate = std::sqrt(m.delta) * kappa;
  DecayFit f = ref == DecayReference::Gamma ? fit_decay(g, rho, m.omega_delta[k], m.dist_to_Gamma[k], rate, m.delta)
                                            : fit_decay(g, rho, m.S_j[k], m.dist_to_C[k], rate, m.delta);
  f.region_id = j;
  return f;
}

PhiView phi_n_view(const Grid& g, std::span<const double> phin, std::span<const double> rho) {
  double m = 0.0, mp = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    m += g.node_area(n) * rho[n];
    mp += g.node_area(n) * rho[n] * phin[n];
  }
  if (!(m > 0.0)) throw ZeroOrderParameter("order parameter vanishes identically");
  PhiView v;
  v.C = -mp / m;
  v.Phi.resize(phin.size());
  for (std::size_t n = 0; n < phin.size(); ++n) {
    v.Phi[n] = phin[n] + v.C;
    v.phin_inf = std::max(v.phin_inf, std::abs(phin[n]));
  }
  double o = 0.0;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) o += g.node_area(n) * rho[n] * v.Phi[n];
  v.orthogonality = std::abs(o);
  v.orthogonality_rel = v.phin_inf > 0.0 ? v.orthogonality / (m * v.phin_inf) : v.orthogonality / m;
  v.bound_ok = std::abs(v.C) <= v.phin_inf * (1.0 + 1e-12);
  return v;
}

Lemma31Report lemma31_check(const Grid& g, std::span<const double> Bn, std::span<const double> field, double kappa,
                            double delta, double alpha) {
  Lemma31Report r;
  r.kappa = kappa;
  r.delta = delta;
  r.alpha = alpha;
  RealField kb(Bn.size());
  for (std::size_t n = 0; n < Bn.size(); ++n) kb[n] = kappa * Bn[n];
  const RealField B = plaquette_to_node(g, field, kb);
  const double level = 1.0 + delta + std::pow(kappa, -alpha);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (!(std::abs(Bn[n]) > level)) continue;
    ++r.n_S;
    if (!(std::abs(B[n]) > (1.0 + delta) * kappa)) ++r.violations;
  }
  r.holds = r.violations == 0;
  return r;
}

void DecayTracker::record(double t, std::span<const cplx> psi) {
  double m = 0.0;
  for (std::size_t n = 0; n < g_->num_nodes(); ++n)
    if (mask_[n]) m += g_->node_area(n) * std::norm(psi[n]);
  t_.push_back(t);
  m_.push_back(m);
}

DecayTrack DecayTracker::finish(double window, double max_drift) const {
  DecayTrack d;
  d.t = t_;
  d.m = m_;
  if (t_.empty()) return d;
  const double t0 = t_.back() - window * (t_.back() - t_.front());
  std::vector<double> w;
  for (std::size_t k = 0; k < t_.size(); ++k)
    if (t_[k] >= t0) w.push_back(m_[k]);
  d.limsup = *std::max_element(w.begin(), w.end());
  double s = 0.0;
  for (double v : w) s += v;
  d.window_mean = s / double(w.size());
  const std::size_t half = w.size() / 2;
  if (half > 0) {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < half; ++k) a += w[k];
    for (std::size_t k = half; k < w.size(); ++k) b += w[k];
    a /= double(half);
    b /= double(w.size() - half);
    d.drift = d.window_mean > 0.0 ? std::abs(b - a) / d.window_mean : 0.0;
  }
  d.horizon_ok = d.drift < max_drift;
  return d;
}

DecayTrack time_decay_track(const DecayTracker& tracker, double window, double max_drift) {
  DecayTrack d = tracker.finish(window, max_drift);
  if (!d.horizon_ok)
    throw InsufficientHorizon("trailing-window drift " + std::to_string(d.drift) + " exceeds " +
                              std::to_string(max_drift));
  return d;
}

CaseResult run_wire_case(const WireCase& c, const StepObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  if (c.region != 1 && c.region != 2) throw ConfigError("region must be 1 or 2");
  CaseResult r;
  r.config = c;
  auto d = build_wire_domain(c.Lx, c.Ly, c.nx, c.ny);
  const auto J = make_current(d.grid, c.current);
  PhysicsParams p = c.phys;
  if (c.h2_target) p.h_ex = *c.h2_target - compute_hj(d, J, 0.0).trace[1];
  r.config.phys = p;
  r.hj = compute_hj(d, J, p.h_ex);

  TdglSystem sys(d, J, p, c.scheme, 0.0, c.dt_factor);
  sys.set_projection_interval(c.n_proj);
  const Grid& g = sys.grid();
  GLState s = sys.initial_state(c.init, c.seed);
  r.masks = extract_regions(g, sys.normal().Bn, c.delta);
  r.Bn = sys.normal().Bn;
  const auto k = std::size_t(c.region - 1);

  DecayTracker tracker(g, r.masks.omega_delta[k]);
  const long every = std::max(1L, long(c.t_max / sys.dt() / 2000.0));
  tracker.record(s.t, s.psi);
  WindowAverage avg;
  avg.t_start = c.t_max * (1.0 - c.window);
  r.conv = sys.run_to_steady(s, c.tol, c.t_max, [&](const GLState& st, const StepReport& rep) {
    if (st.step % every == 0) tracker.record(st.t, st.psi);
    if (st.t > avg.t_start) avg.add(st, sys.field(st), rep.dt_used);
    if (observer) observer(sys, st, rep);
  });

  if (r.conv.status == ConvergenceReport::Status::Converged || avg.weight == 0.0) {
    r.rho = density(s.psi);
    r.field = sys.field(s);
  } else {
    avg.finish();
    r.averaged = true;
    r.rho = std::move(avg.rho);
    r.field = std::move(avg.field);
  }
  r.obs = sys.observables(s);
  r.identities = sys.steady_identities(s);
  r.psi_l2 = std::sqrt(integrate(g, r.rho));
  r.ratio = mass_fraction(g, r.rho, r.masks.omega_delta[k]);
  try {
    r.fit_gamma = agmon_fit(g, r.rho, r.masks, c.region, p.kappa, DecayReference::Gamma);
  } catch (const Error& e) {
    r.fit_error = e.what();
  }
  try {
    r.fit_C = agmon_fit(g, r.rho, r.masks, c.region, p.kappa, DecayReference::C);
  } catch (const Error& e) {
    if (r.fit_error.empty()) r.fit_error = e.what();
  }
  r.track = tracker.finish(c.window);
  if (integrate(g, r.rho) > 0.0) r.phi = phi_n_view(g, sys.normal().phin, r.rho);
  r.lemma = lemma31_check(g, sys.normal().Bn, r.field, p.kappa, c.delta);
  r.state = std::move(s);
  r.wall_seconds = seconds_since(t0);
  return r;
}

std::array<double, 2> loglog_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DegenerateFit("log-log fit needs two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::log(x[i]) - mx, v = std::log(y[i]) - my;
    sxx += u * u;
    sxy += u * v;
  }
  if (!(sxx > 0.0)) throw DegenerateFit("log-log fit has no spread");
  const double slope = sxy / sxx;
  if (n == 2) return {slope, inf};
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - my - slope * (std::log(x[i]) - mx);
    sse += e * e;
  }
  static constexpr double tq[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228};
  const std::size_t dof = n - 2;
  const double t = dof <= 10 ? tq[dof - 1] : 1.96;
  return {slope, t * std::sqrt(sse / double(dof) / sxx)};
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t nt = std::min<std::size_t>(n, std::size_t(std::max(1, jobs)));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

SweepRow make_sweep_row(double param, const CaseResult& r) {
  SweepRow row;
  row.param = param;
  row.ok = true;
  row.psi_l2 = r.psi_l2;
  row.psi_sup = r.obs.psi_sup;
  row.converged = r.conv.status == ConvergenceReport::Status::Converged;
  row.mixed = r.conv.mixed;
  if (r.fit_gamma) {
    row.slope_gamma = r.fit_gamma->slope;
    row.r2_gamma = r.fit_gamma->r_squared;
  }
  if (r.fit_C) {
    row.slope_C = r.fit_C->slope;
    row.r2_C = r.fit_C->r_squared;
  }
  row.ratio = r.ratio;
  row.limsup = r.track.limsup;
  row.energy_rel = r.identities.energy_rel;
  row.potential_rel = r.identities.potential_rel;
  row.orthogonality_rel = r.identities.scale > 0.0 ? r.identities.orthogonality / r.identities.scale : 0.0;
  row.wall_seconds = r.wall_seconds;
  return row;
}

SweepResult kappa_sweep(const std::vector<double>& kappas, const WireCase& base, int jobs,
                        const std::function<CaseResult(const WireCase&)>& runner) {
  SweepResult s;
  s.param = "kappa";
  std::vector<double> ks = kappas;
  std::sort(ks.begin(), ks.end());
  s.rows.resize(ks.size());
  parallel_for(ks.size(), jobs, [&](std::size_t i) {
    WireCase c = base;
    c.phys.kappa = ks[i];
    try {
      const CaseResult r = runner ? runner(c) : run_wire_case(c);
      s.rows[i] = make_sweep_row(ks[i], r);
    } catch (const Error& e) {
      s.rows[i].param = ks[i];
      s.rows[i].error = e.what();
    }
  });
  check_kappa_bound(s, base.phys.c);
  return s;
}

void check_kappa_bound(SweepResult& s, double c) {
  std::vector<const SweepRow*> ok;
  for (const auto& r : s.rows)
    if (r.ok) ok.push_back(&r);
  s.degenerate = std::none_of(ok.begin(), ok.end(), [](const SweepRow* r) { return r->mixed; });
  s.monotone = true;
  for (std::size_t i = 1; i < ok.size(); ++i)
    if (ok[i]->psi_l2 > ok[i - 1]->psi_l2 * (1.0 + 1e-12)) s.monotone = false;
  const double cf = std::cbrt(1.0 + 1.0 / std::sqrt(c));
  s.bound_ok = !ok.empty();
  if (!ok.empty()) {
    s.C_bound = ok.front()->psi_l2 / (cf * std::pow(ok.front()->param, -1.0 / 6.0));
    for (const auto* r : ok)
      if (r->psi_l2 > s.C_bound * cf * std::pow(r->param, -1.0 / 6.0) * (1.0 + 1e-12)) s.bound_ok = false;
  }
  std::vector<double> x, y;
  for (const auto* r : ok)
    if (r->mixed && r->psi_l2 > 0.0) {
      x.push_back(r->param);
      y.push_back(r->psi_l2);
    }
  s.exponent_fitted = x.size() >= 4;
  if (s.exponent_fitted) {
    const auto e = loglog_exponent(x, y);
    s.exponent = e[0];
    s.exponent_ci = e[1];
  }
}

Mask large_domain_region(std::span<const double> B, double delta, double eps, double gamma) {
  const double level = delta * std::pow(eps, -gamma);
  Mask D(B.size(), 0);
  for (std::size_t n = 0; n < B.size(); ++n) D[n] = std::abs(B[n]) < level;
  return D;
}

std::array<double, 2> insulator_distances(const Grid& g, const Mask& D) {
  std::array<double, 2> d{inf, inf};
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (!D[n]) continue;
    const double x = g.x(g.node_i(n));
    d[0] = std::min(d[0], x);
    d[1] = std::min(d[1], g.Lx() - x);
  }
  return d;
}

RealField distance_to_mask(const Grid& g, const Mask& D) {
  const long nx = long(g.nx()), ny = long(g.ny());
  std::vector<Point> bd;
  for (long j = 0; j < ny; ++j)
    for (long i = 0; i < nx; ++i) {
      if (!D[g.node(std::size_t(i), std::size_t(j))]) continue;
      bool edge = false;
      for (long dj = -1; dj <= 1 && !edge; ++dj)
        for (long di = -1; di <= 1 && !edge; ++di) {
          const long a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
          edge = !D[g.node(std::size_t(a), std::size_t(b))];
        }
      if (edge) bd.push_back({g.x(std::size_t(i)), g.y(std::size_t(j))});
    }
  RealField dist = distance_to_points(g, bd);
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (D[n]) dist[n] = 0.0;
  return dist;
}

WComparison w_comparison(const Grid& g, std::span<const double> rho, std::span<const double> B, double eps) {
  RealField q(g.num_nodes()), data(g.num_nodes());
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    q[n] = rho[n] / (eps * eps);
    data[n] = B[n] - 1.0;
  }
  DirichletSolver solver(g, q);
  WComparison w;
  w.w = solver.solve(data);
  w.residual = solver.residual(w.w);
  double scale = 0.0;
  for (double v : data) scale = std::max(scale, std::abs(v));
  if (!(w.residual <= 1e-10 * std::max(1.0, scale) / (g.h() * g.h())))
    throw LinearSolveError("comparison problem residual " + std::to_string(w.residual));
  w.upper = -inf;
  w.lower = inf;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const double e = B[n] - 1.0 - w.w[n];
    w.upper = std::max(w.upper, e);
    w.lower = std::min(w.lower, e);
  }
  w.defect = std::max(std::abs(w.upper), std::abs(w.lower));
  return w;
}

double predicted_large_domain_rate(double eps, double gamma, double delta, double theta0) {
  return std::sqrt(delta * theta0 * std::pow(eps, -gamma) / 2.0) / (2.0 * eps);
}

DecayFit agmon_large_domain(const Grid& g, std::span<const double> rho, const Mask& D, double eps, double gamma,
                            double delta, double theta0) {
  if (count(D) == 0) throw EmptyRegion("D_delta is empty");
  Mask out(D.size());
  for (std::size_t n = 0; n < D.size(); ++n) out[n] = !D[n];
  const RealField dist = distance_to_mask(g, D);
  const double rate = std::sqrt(2.0 * delta * theta0 * std::pow(eps, -gamma)) / (4.0 * eps);
  return fit_decay(g, rho, out, dist, rate, delta);
}

LargeDomainRun large_domain_run(const LargeDomainParams& p, const StepObserver& observer) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(p.eps > 0.0 && p.eps < 1.0)) throw ConfigError("eps must lie in (0,1)");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
  LargeDomainRun r;
  r.params = p;
  r.kappa = 1.0 / p.eps;
  r.g = r.kappa * r.kappa;
  r.F = std::pow(p.eps, -p.gamma);
  auto d = build_wire_domain(p.Lx, p.Ly, p.nx, p.ny);
  const auto J1 = make_current(d.grid, p.current);
  const auto hj = compute_hj(d, J1, p.h_ex);
  r.b = hj.trace;
  r.delta0 = std::min(std::abs(r.b[0]), std::abs(r.b[1]));

  PhysicsParams phys;
  phys.kappa = r.kappa;
  phys.c = 1.0;
  phys.h_ex = p.h_ex * r.F;
  phys.g = r.g;
  TdglSystem sys(d, J1.scaled(r.F), phys, p.scheme, 0.0, p.dt_factor);
  const Grid& g = sys.grid();
  GLState s = sys.initial_state(p.init, p.seed);
  WindowAverage avg;
  avg.t_start = p.t_max * (1.0 - p.window);
  r.conv = sys.run_to_steady(s, p.tol, p.t_max, [&](const GLState& st, const StepReport& rep) {
    if (st.t > avg.t_start) avg.add(st, sys.field(st), rep.dt_used);
    if (observer) observer(sys, st, rep);
  });
  RealField field;
  if (r.conv.status == ConvergenceReport::Status::Converged || avg.weight == 0.0) {
    r.rho = density(s.psi);
    field = sys.field(s);
  } else {
    avg.finish();
    r.averaged = true;
    r.rho = std::move(avg.rho);
    field = std::move(avg.field);
  }
  RealField kb(g.num_nodes());
  for (std::size_t n = 0; n < kb.size(); ++n) kb[n] = r.kappa * sys.normal().Bn[n];
  r.B_eps = plaquette_to_node(g, field, kb);
  for (double& v : r.B_eps) v *= p.eps;

  r.D_delta = large_domain_region(r.B_eps, p.delta, p.eps, p.gamma);
  r.d_delta_j = insulator_distances(g, r.D_delta);
  r.d_delta = std::max(r.d_delta_j[0], r.d_delta_j[1]);
  r.w = w_comparison(g, r.rho, r.B_eps, p.eps);
  const double theta0 = de_gennes_theta0().theta0;
  r.predicted_rate = predicted_large_domain_rate(p.eps, p.gamma, p.delta, theta0);
  if (!r.conv.mixed) {
    r.fit_error = "normal state, nothing to fit";
  } else {
    try {
      r.decay = agmon_large_domain(g, r.rho, r.D_delta, p.eps, p.gamma, p.delta, theta0);
    } catch (const Error& e) {
      r.fit_error = e.what();
    }
  }
  r.state = std::move(s);
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace glwire

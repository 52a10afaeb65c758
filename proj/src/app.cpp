#include "glwire/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>

#include "glwire/errors.hpp"
#include "glwire/spectral.hpp"

namespace glwire::app {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);  // JSON has no inf or nan
}

json conv_json(const ConvergenceReport& c) {
  return json{{"status", c.status == ConvergenceReport::Status::Converged ? "converged" : "max_time"},
              {"mixed", c.mixed},
              {"steps", c.steps},
              {"t", c.t},
              {"final_rate", num(c.final_rate)}};
}

json fit_json(const std::optional<DecayFit>& f) {
  if (!f) return nullptr;
  return json{{"slope", f->slope},
              {"intercept", f->intercept},
              {"r_squared", f->r_squared},
              {"n_points", f->n_points},
              {"d_min", f->d_min},
              {"d_max", f->d_max},
              {"agmon_integral", num(f->agmon_integral)},
              {"agmon_scaled", num(f->agmon_scaled)}};
}

std::string state_label(const ConvergenceReport& c, const RegionMasks& m) {
  if (!c.mixed) return "normal";
  const bool none = std::none_of(m.omega[0].begin(), m.omega[0].end(), [](auto v) { return v; }) &&
                    std::none_of(m.omega[1].begin(), m.omega[1].end(), [](auto v) { return v; });
  return none ? "superconducting" : "mixed";
}

fs::path run_dir(const RunConfig& c) { return output_root(c) / (c.output.name.empty() ? "run" : c.output.name); }

// Checkpoint writer shared by the step observer and the final dump.
struct Dumper {
  fs::path dir;
  long every = 0;
  json config;
  std::optional<CheckpointMeta> meta;

  StepObserver observer() {
    return [this](const TdglSystem& sys, const GLState& s, const StepReport&) {
      if (!meta) meta = CheckpointMeta::of(sys);
      if (every > 0 && s.step % every == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%08ld", s.step);
        write_checkpoint(dir / "checkpoints" / name, *meta, s, config);
      }
    };
  }
  void final(const GLState& s) const {
    if (meta) write_checkpoint(dir / "checkpoint", *meta, s, config);
  }
};

void print_error(std::ostream& err, const Error& e) {
  err << "solver error in stage '" << stage_of(e) << "': " << e.what();
  if (const auto* b = dynamic_cast<const BlowupError*>(&e); b && std::string(e.what()).find("step") == std::string::npos)
    err << " (step " << b->step() << ")";
  err << "\n";
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

const std::vector<std::string> kSpectralColumns{"kind", "alpha", "xi", "T", "R",     "Lx",
                                                "Ly",   "h",     "value", "value2", "residual", "iterations"};

}  // namespace

std::string stage_of(const Error& e) {
  if (dynamic_cast<const BlowupError*>(&e)) return "tdgl time stepping";
  if (dynamic_cast<const LinearSolveError*>(&e)) return "linear solve";
  if (dynamic_cast<const CompatibilityError*>(&e)) return "normal fields";
  if (dynamic_cast<const EigSolveError*>(&e)) return "eigensolver";
  if (dynamic_cast<const GeometryError*>(&e) || dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const EmptyRegion*>(&e) || dynamic_cast<const DegenerateFit*>(&e) ||
      dynamic_cast<const ZeroOrderParameter*>(&e) || dynamic_cast<const InsufficientHorizon*>(&e))
    return "analysis";
  return "pipeline";
}

CsvTable centerline_table(const Grid& g, std::span<const double> rho) {
  CsvTable t({"x", "psi_abs"});
  const std::size_t j = (g.ny() - 1) / 2;
  for (std::size_t i = 0; i < g.nx(); ++i) t.add_row({fmt(g.x(i)), fmt(std::sqrt(rho[g.node(i, j)]))});
  return t;
}

CsvTable contour_table(const Grid& g, std::span<const double> f, const std::vector<double>& levels) {
  // One row per segment; gnuplot: plot f u 2:3:($4-$2):($5-$3) w vectors nohead.
  CsvTable t({"level", "x0", "y0", "x1", "y1"});
  for (double lv : levels) {
    for (std::size_t j = 0; j + 1 < g.ny(); ++j)
      for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
        const std::size_t c[4] = {g.node(i, j), g.node(i + 1, j), g.node(i + 1, j + 1), g.node(i, j + 1)};
        const double px[4] = {g.x(i), g.x(i + 1), g.x(i + 1), g.x(i)};
        const double py[4] = {g.y(j), g.y(j), g.y(j + 1), g.y(j + 1)};
        double v[4];
        for (int k = 0; k < 4; ++k) v[k] = f[c[k]] - lv;
        // Crossings on edges bottom, right, top, left.
        std::array<std::optional<Point>, 4> cross;
        int count = 0;
        for (int k = 0; k < 4; ++k) {
          const int m = (k + 1) % 4;
          if ((v[k] < 0.0) != (v[m] < 0.0)) {
            const double s = v[k] / (v[k] - v[m]);
            cross[k] = Point{px[k] + s * (px[m] - px[k]), py[k] + s * (py[m] - py[k])};
            ++count;
          }
        }
        auto emit = [&](int a, int b) {
          t.add_row({fmt(lv), fmt(cross[a]->at(0)), fmt(cross[a]->at(1)), fmt(cross[b]->at(0)),
                     fmt(cross[b]->at(1))});
        };
        if (count == 2) {
          int a = -1, b = -1;
          for (int k = 0; k < 4; ++k)
            if (cross[k]) (a < 0 ? a : b) = k;
          emit(a, b);
        } else if (count == 4) {
          // Saddle: the centre value decides which corners connect.
          const bool centre_neg = (v[0] + v[1] + v[2] + v[3]) < 0.0;
          if (centre_neg == (v[0] < 0.0)) {
            emit(0, 1);
            emit(2, 3);
          } else {
            emit(3, 0);
            emit(1, 2);
          }
        }
      }
  }
  return t;
}

json wire_report(const RunConfig& cfg, const CaseResult& r) {
  const Grid g(r.config.nx, r.config.ny, r.config.Lx / double(r.config.nx - 1));
  json cj = config_to_json(cfg);
  cj["physics"]["h_ex_resolved"] = r.config.phys.h_ex;
  json rep;
  rep["kind"] = "wire_run";
  rep["config"] = cj;
  rep["state"] = state_label(r.conv, r.masks);
  rep["normal"] = {{"h1", r.hj.trace[0]},
                   {"h2", r.hj.trace[1]},
                   {"h1_formula", r.hj.formula[0]},
                   {"h2_formula", r.hj.formula[1]},
                   {"sign_condition", r.hj.sign_condition},
                   {"S_empty", r.masks.S_empty},
                   {"S_components", r.masks.S_components}};
  rep["convergence"] = conv_json(r.conv);
  rep["averaged"] = r.averaged;
  rep["observables"] = {{"psi_l2", r.obs.psi_l2},
                        {"psi_l4", r.obs.psi_l4},
                        {"psi_sup", r.obs.psi_sup},
                        {"kinetic", r.obs.kinetic},
                        {"cut_flux", r.obs.cut_flux}};
  rep["identities"] = {{"energy_rel", r.identities.energy_rel},
                       {"potential_rel", r.identities.potential_rel},
                       {"orthogonality", r.identities.orthogonality},
                       {"scale", r.identities.scale}};
  rep["psi_l2"] = r.psi_l2;
  rep["ratio"] = r.ratio;
  rep["fit_gamma"] = fit_json(r.fit_gamma);
  rep["fit_C"] = fit_json(r.fit_C);
  rep["fit_error"] = r.fit_error;
  if (r.phi)
    rep["phi_view"] = {{"C", r.phi->C},
                       {"orthogonality_rel", r.phi->orthogonality_rel},
                       {"phin_inf", r.phi->phin_inf},
                       {"bound_ok", r.phi->bound_ok}};
  rep["lemma"] = {{"n_S", r.lemma.n_S}, {"violations", r.lemma.violations}, {"holds", r.lemma.holds}};
  rep["decay_track"] = {{"limsup", r.track.limsup},
                        {"window_mean", r.track.window_mean},
                        {"drift", r.track.drift},
                        {"horizon_ok", r.track.horizon_ok}};
  const auto k = std::size_t(r.config.region - 1);
  rep["masks"] = {{"omega_delta", mask_to_rle(g, r.masks.omega_delta[k])}, {"S", mask_to_rle(g, r.masks.S)}};
  return rep;
}

json write_wire_run(const fs::path& dir, const RunConfig& cfg, const CaseResult& r) {
  const Grid g(r.config.nx, r.config.ny, r.config.Lx / double(r.config.nx - 1));
  const json rep = wire_report(cfg, r);
  const json& cj = rep["config"];
  write_json_hashed(dir / "report.json", rep);

  centerline_table(g, r.rho).write(dir / "centerline.csv", "centerline |psi|", cj);
  const double d = r.config.delta;
  contour_table(g, r.Bn, {-1.0 - d, -1.0, 1.0, 1.0 + d}).write(dir / "contours.csv", "contours Bn", cj);
  CsvTable track({"t", "omega_delta_mass"});
  for (std::size_t i = 0; i < r.track.t.size(); ++i) track.add_row({fmt(r.track.t[i]), fmt(r.track.m[i])});
  track.write(dir / "decay.csv", "decay track", cj);
  write_field(dir, "rho", g, r.rho, FieldLocation::Nodes, "|psi|^2");
  write_field(dir, "Bn", g, r.Bn, FieldLocation::Nodes, "B / Hc2");
  return rep;
}

json large_domain_report(const RunConfig& cfg, const LargeDomainRun& r) {
  const auto& p = r.params;
  const Grid g(p.nx, p.ny, p.Lx / double(p.nx - 1));
  json rep;
  rep["kind"] = "large_domain_run";
  rep["config"] = config_to_json(cfg);
  rep["scaling"] = {{"kappa", r.kappa}, {"g", r.g}, {"F", r.F}};
  rep["b"] = {r.b[0], r.b[1]};
  rep["delta0"] = r.delta0;
  rep["convergence"] = conv_json(r.conv);
  rep["averaged"] = r.averaged;
  rep["d_delta_j"] = {num(r.d_delta_j[0]), num(r.d_delta_j[1])};
  rep["d_delta"] = num(r.d_delta);
  rep["w_comparison"] = {{"defect", r.w.defect}, {"upper", r.w.upper}, {"lower", r.w.lower}, {"residual", r.w.residual}};
  rep["decay"] = fit_json(r.decay);
  rep["predicted_rate"] = r.predicted_rate;
  rep["fit_error"] = r.fit_error;
  rep["D_delta"] = mask_to_rle(g, r.D_delta);
  return rep;
}

json write_large_domain_run(const fs::path& dir, const RunConfig& cfg, const LargeDomainRun& r) {
  const auto& p = r.params;
  const Grid g(p.nx, p.ny, p.Lx / double(p.nx - 1));
  const json rep = large_domain_report(cfg, r);
  const json& cj = rep["config"];
  write_json_hashed(dir / "report.json", rep);

  centerline_table(g, r.rho).write(dir / "centerline.csv", "centerline |psi|", cj);
  const double lv = p.delta * r.F;
  contour_table(g, r.B_eps, {-lv, lv}).write(dir / "contours.csv", "contours B_eps", cj);
  write_field(dir, "rho", g, r.rho, FieldLocation::Nodes, "|psi|^2");
  write_field(dir, "B_eps", g, r.B_eps, FieldLocation::Nodes, "curl A / kappa");
  return rep;
}

CsvTable sweep_table(const SweepResult& s) {
  CsvTable t({s.param, "ok", "converged", "mixed", "psi_l2", "psi_sup", "ratio", "slope_gamma", "r2_gamma", "slope_C",
              "r2_C", "limsup", "energy_rel", "potential_rel", "orthogonality_rel", "error"});
  for (const auto& r : s.rows) {
    std::string e = r.error;
    std::replace(e.begin(), e.end(), ',', ';');
    std::replace(e.begin(), e.end(), '\n', ' ');
    t.add_row({fmt(r.param), r.ok ? "1" : "0", r.converged ? "1" : "0", r.mixed ? "1" : "0", fmt(r.psi_l2),
               fmt(r.psi_sup), fmt(r.ratio), fmt(r.slope_gamma), fmt(r.r2_gamma), fmt(r.slope_C), fmt(r.r2_C),
               fmt(r.limsup), fmt(r.energy_rel), fmt(r.potential_rel), fmt(r.orthogonality_rel), e});
  }
  return t;
}

void check_large_domain(LargeDomainSweep& s) {
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < s.eps.size(); ++i)
    if (s.error[i].empty()) ok.push_back(i);
  // Decreasing eps.
  std::sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) { return s.eps[a] > s.eps[b]; });
  s.defect_ok = !ok.empty();
  for (auto i : ok)
    if (!(s.w_defect[i] <= 0.5 + 2.0 * s.h[i])) s.defect_ok = false;

  // A shared constant exists if d_delta stays away from zero as eps shrinks:
  // here it may lose at most half of its value at the largest eps.
  s.C_delta = std::numeric_limits<double>::infinity();
  for (auto i : ok) s.C_delta = std::min(s.C_delta, s.d_delta[i]);
  s.distance_ok = ok.size() >= 2 && s.C_delta > 0.0;
  if (s.distance_ok && std::isfinite(s.d_delta[ok.front()])) s.distance_ok = s.C_delta >= 0.5 * s.d_delta[ok.front()];

  // Normal rows have no order parameter and no rate; the rest must carry a
  // positive rate that grows as eps shrinks.
  std::vector<std::size_t> fitted;
  for (auto i : ok)
    if (s.mixed[i]) fitted.push_back(i);
  s.rate_ok = fitted.size() >= 2;
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    if (!std::isfinite(s.rate[fitted[k]]) || s.rate[fitted[k]] <= 0.0) s.rate_ok = false;
    if (k > 0 && !(s.rate[fitted[k]] > s.rate[fitted[k - 1]])) s.rate_ok = false;
  }
}

CsvTable large_domain_table(const LargeDomainSweep& s) {
  CsvTable t({"eps", "ok", "mixed", "h", "d_delta", "w_defect", "w_upper", "w_lower", "rate", "r2", "predicted_rate",
              "error"});
  for (std::size_t i = 0; i < s.eps.size(); ++i) {
    std::string e = s.error[i];
    std::replace(e.begin(), e.end(), ',', ';');
    std::replace(e.begin(), e.end(), '\n', ' ');
    t.add_row({fmt(s.eps[i]), e.empty() ? "1" : "0", s.mixed[i] ? "1" : "0", fmt(s.h[i]), fmt(s.d_delta[i]),
               fmt(s.w_defect[i]), fmt(s.w_upper[i]), fmt(s.w_lower[i]), fmt(s.rate[i]), fmt(s.r2[i]),
               fmt(s.predicted[i]), e});
  }
  return t;
}

int cmd_run(const fs::path& cfg_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(cfg_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ConfigFailure;
  }
  const fs::path dir = run_dir(cfg);
  Dumper dump{dir, cfg.output.dump_every, config_to_json(cfg), std::nullopt};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (cfg.mode == RunMode::Wire) {
      const CaseResult r = run_wire_case(cfg.wire, dump.observer());
      dump.final(r.state);
      const json rep = write_wire_run(dir, cfg, r);
      out << "state " << rep["state"].get<std::string>() << "  h1 " << fmt(r.hj.trace[0]) << "  h2 "
          << fmt(r.hj.trace[1]) << "\n"
          << "convergence " << rep["convergence"]["status"].get<std::string>() << " after " << r.conv.steps
          << " steps (t = " << r.conv.t << ")" << (r.averaged ? ", window averaged" : "") << "\n"
          << "psi_l2 " << r.psi_l2 << "  psi_sup " << r.obs.psi_sup << "  ratio " << r.ratio << "\n";
      if (r.fit_C) out << "decay slope " << r.fit_C->slope << " (r2 " << r.fit_C->r_squared << ")\n";
    } else {
      const LargeDomainRun r = large_domain_run(cfg.large, dump.observer());
      dump.final(r.state);
      write_large_domain_run(dir, cfg, r);
      out << "kappa " << r.kappa << "  F " << r.F << "  delta0 " << r.delta0 << "\n"
          << "d_delta " << r.d_delta << "  w defect " << r.w.defect << "\n";
      if (r.decay) out << "decay rate " << r.decay->slope << " (predicted " << r.predicted_rate << ")\n";
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ConfigFailure;
  } catch (const Error& e) {
    print_error(err, e);
    return SolverFailure;
  }
  out << "wrote " << dir.string() << " in " << std::fixed << std::setprecision(1) << seconds_since(t0) << " s\n";
  return Ok;
}

int cmd_sweep(const fs::path& cfg_path, const std::string& param, const std::vector<double>& values_in, int jobs,
              std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::vector<RunConfig> cfgs;
  const std::vector<double> values = sorted(values_in);
  try {
    if (values.empty()) throw ConfigError("sweep: empty value list");
    if (jobs < 1) throw ConfigError("sweep: --jobs must be at least 1");
    cfg = load_config(cfg_path);
    for (double v : values) {
      RunConfig c = cfg;
      set_param(c, param, v);
      c.output.name = cfg.output.name + "/sweep_" + param + "/" + param + "_" + fmt(v);
      cfgs.push_back(std::move(c));
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ConfigFailure;
  }
  const fs::path dir = run_dir(cfg) / ("sweep_" + param);
  json cj = config_to_json(cfg);
  cj["sweep"] = {{"param", param}, {"values", values}};
  json summary{{"kind", "sweep"}, {"param", param}, {"config", cj}};
  bool checks_ok = true;
  std::size_t n_ok = 0;
  std::mutex io;

  auto run_row = [&](std::size_t i, auto&& body) {
    try {
      body();
      return std::string();
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(io);
      err << param << " = " << fmt(values[i]) << ": ";
      print_error(err, e);
      return std::string(e.what());
    }
  };

  if (param == "eps") {
    LargeDomainSweep s;
    const std::size_t n = values.size();
    s.eps = values;
    s.error.assign(n, "");
    s.h = s.d_delta = s.w_defect = s.w_upper = s.w_lower = s.rate = s.r2 = s.predicted =
        std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
    s.mixed.assign(n, false);
    parallel_for(n, jobs, [&](std::size_t i) {
      const auto& c = cfgs[i];
      s.h[i] = c.large.Lx / double(c.large.nx - 1);
      s.error[i] = run_row(i, [&] {
        Dumper dump{run_dir(c), c.output.dump_every, config_to_json(c), std::nullopt};
        const LargeDomainRun r = large_domain_run(c.large, dump.observer());
        dump.final(r.state);
        write_large_domain_run(run_dir(c), c, r);
        s.mixed[i] = r.conv.mixed;
        s.d_delta[i] = r.d_delta;
        s.w_defect[i] = r.w.defect;
        s.w_upper[i] = r.w.upper;
        s.w_lower[i] = r.w.lower;
        s.predicted[i] = r.predicted_rate;
        if (r.decay) {
          s.rate[i] = r.decay->slope;
          s.r2[i] = r.decay->r_squared;
        } else if (r.conv.mixed) {
          throw DegenerateFit("no decay fit: " + r.fit_error);
        }
      });
    });
    check_large_domain(s);
    large_domain_table(s).write(dir / "sweep.csv", "sweep eps", cj);
    for (const auto& e : s.error) n_ok += e.empty();
    summary["checks"] = {{"w_defect", s.defect_ok}, {"distance_shared_constant", s.distance_ok},
                         {"rate_increases", s.rate_ok}};
    summary["C_delta"] = num(s.C_delta);
    checks_ok = s.defect_ok && s.distance_ok && s.rate_ok;
    out << large_domain_table(s).body();
  } else {
    SweepResult s;
    s.param = param;
    s.rows.resize(values.size());
    parallel_for(values.size(), jobs, [&](std::size_t i) {
      const auto& c = cfgs[i];
      s.rows[i].param = values[i];
      s.rows[i].error = run_row(i, [&] {
        Dumper dump{run_dir(c), c.output.dump_every, config_to_json(c), std::nullopt};
        const CaseResult r = run_wire_case(c.wire, dump.observer());
        dump.final(r.state);
        write_wire_run(run_dir(c), c, r);
        s.rows[i] = make_sweep_row(values[i], r);
      });
    });
    for (const auto& r : s.rows) n_ok += r.ok;
    json checks = json::object();
    if (param == "kappa") {
      check_kappa_bound(s, cfg.wire.phys.c);
      // An all-normal sweep satisfies the bound vacuously; that is not a pass.
      const bool pass = s.monotone && s.bound_ok && !s.degenerate;
      checks["kappa_bound"] = pass;
      summary["kappa_bound"] = {{"monotone", s.monotone},       {"bound_ok", s.bound_ok},
                                {"degenerate", s.degenerate},   {"C", s.C_bound},
                                {"exponent", s.exponent},       {"exponent_ci", s.exponent_ci},
                                {"exponent_fitted", s.exponent_fitted}};
      checks_ok = pass;
    }
    summary["checks"] = checks;
    sweep_table(s).write(dir / "sweep.csv", "sweep " + param, cj);
    out << sweep_table(s).body();
  }
  summary["rows_ok"] = n_ok;
  summary["rows"] = values.size();
  write_json_hashed(dir / "summary.json", summary);
  for (const auto& [name, v] : summary["checks"].items())
    out << "check " << name << ": " << (v.get<bool>() ? "pass" : "FAIL") << "\n";
  out << "wrote " << dir.string() << "\n";
  if (n_ok == 0) return SolverFailure;
  return checks_ok ? Ok : CheckFailure;
}

double cached_theta0(const fs::path& root, double T, double h) {
  const fs::path file = root / "spectral" / "theta0.json";
  if (fs::exists(file)) {
    try {
      const json j = json::parse(read_file(file));
      if (json_hash_ok(j) && j.at("T") == T && j.at("h") == h) return j.at("theta0").get<double>();
    } catch (const std::exception&) {
      // stale or corrupt cache: recompute
    }
  }
  const auto r = de_gennes_theta0(T, h);
  write_json_hashed(file, json{{"T", T}, {"h", h}, {"theta0", r.theta0}, {"xi0", r.xi0}});
  return r.theta0;
}

int cmd_spectral(const std::string& sub, const SpectralArgs& a, std::ostream& out, std::ostream& err) {
  fs::path root = a.root;
  if (root.empty()) {
    const char* e = std::getenv("GLWIRE_OUT");
    root = (e && *e) ? fs::path(e) : fs::path("glwire_out");
  }
  const fs::path file = root / "spectral" / "spectral.csv";
  const json cj{{"table", "spectral"}, {"columns", kSpectralColumns}};
  CsvTable t(kSpectralColumns);
  const std::string blank;
  auto pick = [&](double def) { return a.h > 0.0 ? a.h : def; };
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (!(a.h >= 0.0)) throw DomainError("mesh size must be positive");
    if (sub == "theta0") {
      const double h = pick(0.01);
      const auto r = de_gennes_theta0(a.T, h);
      write_json_hashed(root / "spectral" / "theta0.json",
                        json{{"T", a.T}, {"h", h}, {"theta0", r.theta0}, {"xi0", r.xi0}});
      t.add_row({"theta0", blank, fmt(r.xi0), fmt(a.T), blank, blank, blank, fmt(h), fmt(r.theta0), fmt(r.xi0 * r.xi0),
                 blank, std::to_string(r.evaluations)});
      out << std::setprecision(10) << "theta0 " << r.theta0 << "  xi0 " << r.xi0 << "\n";
    } else if (sub == "mu") {
      const double h = pick(0.01);
      const auto r = de_gennes_mu(a.xi, a.T, h);
      t.add_row({"mu", blank, fmt(a.xi), fmt(a.T), blank, blank, blank, fmt(h), fmt(r.value), blank, fmt(r.residual),
                 std::to_string(r.iterations)});
      out << std::setprecision(10) << "mu(" << a.xi << ") " << r.value << "\n";
    } else if (sub == "sector") {
      const double h = pick(0.05);
      const double th = cached_theta0(root);
      const auto r = sector_dn_ground(SectorProblem{a.alpha, a.R, h});
      t.add_row({"sector", fmt(a.alpha), blank, blank, fmt(a.R), blank, blank, fmt(h), fmt(r.value), fmt(th),
                 fmt(r.residual), std::to_string(r.iterations)});
      out << std::setprecision(8) << "sector alpha " << a.alpha << "  mu " << r.value << "  theta0 " << th
          << "  rel " << (r.value - th) / th << "\n";
    } else if (sub == "lambda") {
      const double h = pick(1.0 / 64.0);
      const auto r = lambda_vs_lambdaD(a.Lx, a.Ly, h);
      t.add_row({"lambda", blank, blank, blank, blank, fmt(a.Lx), fmt(a.Ly), fmt(h), fmt(r.lambda), fmt(r.lambdaD),
                 blank, blank});
      out << std::setprecision(10) << "lambda " << r.lambda << "  lambdaD " << r.lambdaD << "  rel "
          << std::abs(r.lambda - r.lambdaD) / r.lambdaD << "\n";
    } else {
      err << "unknown spectral subcommand '" << sub << "' (theta0|sector|mu|lambda)\n";
      return ConfigFailure;
    }
  } catch (const EigSolveError& e) {
    print_error(err, e);
    return SolverFailure;
  } catch (const DomainError& e) {
    err << "argument error: " << e.what() << "\n";
    return ConfigFailure;
  } catch (const Error& e) {
    print_error(err, e);
    return SolverFailure;
  }
  t.append(file, "spectral", cj);
  out << "appended to " << file.string() << " (" << std::fixed << std::setprecision(2) << seconds_since(t0)
      << " s)\n";
  return Ok;
}

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    err << "not a directory: " << dir.string() << "\n";
    return ConfigFailure;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::size_t checked = 0, bad = 0;
  for (const auto& f : files) {
    const std::string ext = f.extension().string();
    const std::string name = f.filename().string();
    bool ok = true;
    try {
      if (ext == ".csv") {
        ok = csv_hash_ok(read_file(f));
      } else if (name == "report.json" || name == "summary.json" || name == "theta0.json") {
        ok = json_hash_ok(json::parse(read_file(f)));
      } else if (ext == ".json") {
        const json j = json::parse(read_file(f));
        if (!j.contains("sha256")) continue;
        const fs::path bin = f.parent_path() / (f.stem().string() + ".bin");
        ok = fs::exists(bin) && sha256_hex(read_file(bin)) == j.at("sha256").get<std::string>();
      } else {
        continue;
      }
    } catch (const std::exception&) {
      ok = false;
    }
    ++checked;
    if (!ok) {
      ++bad;
      out << "hash MISMATCH " << fs::relative(f, dir).string() << "\n";
    }
  }
  const fs::path rep = dir / "report.json", sum = dir / "summary.json";
  if (fs::exists(rep)) {
    const json j = json::parse(read_file(rep));
    out << "kind " << j.value("kind", "?") << "\n";
    for (const char* k : {"state", "psi_l2", "ratio", "d_delta", "delta0", "predicted_rate"})
      if (j.contains(k)) out << k << " " << j[k].dump() << "\n";
    for (const char* k : {"normal", "convergence", "fit_C", "fit_gamma", "w_comparison", "decay", "lemma"})
      if (j.contains(k) && !j[k].is_null()) out << k << " " << j[k].dump() << "\n";
  }
  if (fs::exists(sum)) {
    const json j = json::parse(read_file(sum));
    out << "sweep " << j.value("param", "?") << ": " << j.value("rows_ok", 0) << "/" << j.value("rows", 0)
        << " rows ok\n";
    for (const auto& [name, v] : j["checks"].items()) out << "check " << name << ": " << (v.get<bool>() ? "pass" : "FAIL") << "\n";
  }
  if (checked == 0) {
    err << "no glwire artifacts under " << dir.string() << "\n";
    return ConfigFailure;
  }
  out << checked << " files checked, " << bad << " hash mismatches\n";
  return bad ? CheckFailure : Ok;
}

}  // namespace glwire::app

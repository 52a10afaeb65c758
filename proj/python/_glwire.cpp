#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "glwire/app.hpp"
#include "glwire/errors.hpp"
#include "glwire/normal_fields.hpp"
#include "glwire/spectral.hpp"

namespace py = pybind11;
using namespace glwire;

namespace {

// Node field as a (ny, nx) array, row j holding y = j h.
py::array_t<double> node_array(const RealField& f, std::size_t nx, std::size_t ny) {
  py::array_t<double> a({ny, nx});
  std::copy(f.begin(), f.end(), a.mutable_data());
  return a;
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict run_wire(const std::string& text) {
  const RunConfig cfg = parse_config(text, "<string>");
  if (cfg.mode != RunMode::Wire) throw ConfigError("run_wire needs run.mode = wire");
  CaseResult r;
  {
    py::gil_scoped_release unlocked;
    r = run_wire_case(cfg.wire);
  }
  py::dict out = to_py(app::wire_report(cfg, r));
  out["rho"] = node_array(r.rho, cfg.wire.nx, cfg.wire.ny);
  out["Bn"] = node_array(r.Bn, cfg.wire.nx, cfg.wire.ny);
  return out;
}

py::dict run_large_domain(const std::string& text) {
  const RunConfig cfg = parse_config(text, "<string>");
  if (cfg.mode != RunMode::LargeDomain) throw ConfigError("run_large_domain needs run.mode = large_domain");
  LargeDomainRun r;
  {
    py::gil_scoped_release unlocked;
    r = large_domain_run(cfg.large);
  }
  py::dict out = to_py(app::large_domain_report(cfg, r));
  out["rho"] = node_array(r.rho, cfg.large.nx, cfg.large.ny);
  out["B_eps"] = node_array(r.B_eps, cfg.large.nx, cfg.large.ny);
  out["w"] = node_array(r.w.w, cfg.large.nx, cfg.large.ny);
  return out;
}

py::dict normal_fields(const std::string& text) {
  const RunConfig cfg = parse_config(text, "<string>");
  const auto& c = cfg.wire;
  auto d = build_wire_domain(c.Lx, c.Ly, c.nx, c.ny);
  const auto J = make_current(d.grid, c.current);
  double h_ex = c.phys.h_ex;
  if (c.h2_target) h_ex = *c.h2_target - compute_hj(d, J, 0.0).trace[1];
  const auto nf = compute_normal_fields(d, J, h_ex);
  const auto hj = compute_hj(d, J, h_ex);
  py::dict out;
  out["h_ex"] = h_ex;
  out["h1"] = hj.trace[0];
  out["h2"] = hj.trace[1];
  out["h1_formula"] = hj.formula[0];
  out["h2_formula"] = hj.formula[1];
  out["Bn"] = node_array(nf.Bn, c.nx, c.ny);
  out["phin"] = node_array(nf.phin, c.nx, c.ny);
  return out;
}

}  // namespace

PYBIND11_MODULE(_glwire, m) {
  m.doc() = "Ginzburg-Landau wire solver";

  py::register_exception<Error>(m, "GlwireError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "theta0",
      [](double T, double h) {
        const auto r = de_gennes_theta0(T, h);
        return py::make_tuple(r.theta0, r.xi0);
      },
      py::arg("T") = 10.0, py::arg("h") = 0.01, "(theta0, xi0) of the half-line de Gennes problem");
  m.def(
      "de_gennes_mu", [](double xi, double T, double h) { return de_gennes_mu(xi, T, h).value; }, py::arg("xi"),
      py::arg("T") = 10.0, py::arg("h") = 0.01);
  m.def(
      "sector_ground",
      [](double alpha, double R, double h) {
        py::gil_scoped_release unlocked;
        return sector_dn_ground(SectorProblem{alpha, R, h}).value;
      },
      py::arg("alpha"), py::arg("R") = 12.0, py::arg("h") = 0.05,
      "ground energy of the unit-field Neumann problem on a truncated sector");
  m.def(
      "lambda_pair",
      [](double Lx, double Ly, double h) {
        const auto r = lambda_vs_lambdaD(Lx, Ly, h);
        return py::make_tuple(r.lambda, r.lambdaD);
      },
      py::arg("Lx") = 1.0, py::arg("Ly") = 1.0, py::arg("h") = 1.0 / 64.0);

  m.def(
      "parse_config", [](const std::string& text) { return to_py(config_to_json(parse_config(text, "<string>"))); },
      py::arg("text"), "validated, resolved configuration");
  m.def("normal_fields", &normal_fields, py::arg("text"));
  m.def("run_wire", &run_wire, py::arg("text"), "normal fields, TDGL run and analysis; report plus node arrays");
  m.def("run_large_domain", &run_large_domain, py::arg("text"));
  m.def("sha256", [](const py::bytes& b) { return sha256_hex(std::string(b)); });
}

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "glwire/app.hpp"

namespace {

// "4,8,16" or "1/8,1/16" -> values; fractions keep eps sweeps readable.
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto slash = item.find('/');
    std::size_t used = 0;
    double x = 0.0;
    if (slash == std::string::npos) {
      x = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } else {
      const std::string a = item.substr(0, slash), b = item.substr(slash + 1);
      std::size_t ua = 0, ub = 0;
      x = std::stod(a, &ua) / std::stod(b, &ub);
      if (ua != a.size() || ub != b.size()) throw std::invalid_argument(item);
    }
    v.push_back(x);
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  namespace app = glwire::app;
  CLI::App cli{"Ginzburg-Landau wire simulations"};
  cli.require_subcommand(1);

  std::string cfg;
  auto* run = cli.add_subcommand("run", "normal fields, TDGL run and analysis for one configuration");
  run->add_option("config", cfg, "INI configuration")->required();

  std::string param, values;
  int jobs = 1;
  auto* sweep = cli.add_subcommand("sweep", "independent runs over one parameter");
  sweep->add_option("config", cfg, "INI configuration")->required();
  sweep->add_option("--param", param, "kappa | c | eps | delta | J0")->required();
  sweep->add_option("--values", values, "comma separated list, fractions allowed")->required();
  sweep->add_option("--jobs", jobs, "concurrent rows");

  std::string sub;
  app::SpectralArgs sa;
  auto* spectral = cli.add_subcommand("spectral", "model eigenvalue problems");
  spectral->add_option("what", sub, "theta0 | sector | mu | lambda")->required();
  spectral->add_option("--alpha", sa.alpha, "sector opening angle");
  spectral->add_option("--xi", sa.xi, "de Gennes parameter");
  spectral->add_option("--T", sa.T, "half-line truncation");
  spectral->add_option("--R", sa.R, "sector truncation radius");
  spectral->add_option("--mesh", sa.h, "mesh size");
  spectral->add_option("--Lx", sa.Lx, "rectangle width");
  spectral->add_option("--Ly", sa.Ly, "rectangle height");
  spectral->add_option("--root", sa.root, "output root");

  std::string dir;
  auto* report = cli.add_subcommand("report", "summarise a run or sweep directory and check file hashes");
  report->add_option("dir", dir, "run or sweep directory")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::ConfigFailure;
  }

  if (*run) return app::cmd_run(cfg, std::cout, std::cerr);
  if (*sweep) {
    std::vector<double> v;
    try {
      v = parse_values(values);
    } catch (const std::exception&) {
      std::cerr << "config error: --values: cannot parse '" << values << "'\n";
      return app::ConfigFailure;
    }
    return app::cmd_sweep(cfg, param, v, jobs, std::cout, std::cerr);
  }
  if (*spectral) return app::cmd_spectral(sub, sa, std::cout, std::cerr);
  if (*report) return app::cmd_report(dir, std::cout, std::cerr);
  return app::ConfigFailure;
}

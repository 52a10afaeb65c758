#pragma once

// Command implementations behind the glwire executable. Each returns the
// process exit status: 0 ok, 2 configuration error, 3 solver error,
// 4 a registered check failed.

#include <iosfwd>
#include <string>
#include <vector>

#include "glwire/config.hpp"
#include "glwire/errors.hpp"

namespace glwire::app {

enum Exit : int { Ok = 0, ConfigFailure = 2, SolverFailure = 3, CheckFailure = 4 };

/// Name of the pipeline stage an error comes from, for diagnostics.
std::string stage_of(const Error& e);

/// Run summaries as written to report.json.
json wire_report(const RunConfig& cfg, const CaseResult& r);
json large_domain_report(const RunConfig& cfg, const LargeDomainRun& r);

/// Writes report.json, centerline.csv, contours.csv and checkpoint/ under dir.
json write_wire_run(const fs::path& dir, const RunConfig& cfg, const CaseResult& r);
json write_large_domain_run(const fs::path& dir, const RunConfig& cfg, const LargeDomainRun& r);

/// |psi| along the middle row, and B level-set segments by marching squares.
CsvTable centerline_table(const Grid& g, std::span<const double> rho);
CsvTable contour_table(const Grid& g, std::span<const double> f, const std::vector<double>& levels);

CsvTable sweep_table(const SweepResult& s);

struct LargeDomainSweep {
  std::vector<double> eps;
  std::vector<std::string> error;  // empty when the row ran
  std::vector<double> h, d_delta, w_defect, w_upper, w_lower, rate, r2, predicted;
  std::vector<bool> mixed;
  double C_delta = 0.0;  // shared lower bound: min d_delta over the rows
  bool defect_ok = false, distance_ok = false, rate_ok = false;
};
/// Verdicts of an eps sweep from rows already filled in.
void check_large_domain(LargeDomainSweep& s);
CsvTable large_domain_table(const LargeDomainSweep& s);

int cmd_run(const fs::path& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const fs::path& cfg, const std::string& param, const std::vector<double>& values, int jobs,
              std::ostream& out, std::ostream& err);

struct SpectralArgs {
  double alpha = 1.5707963267948966;
  double xi = 0.59;
  double T = 10.0;
  double R = 12.0;
  double h = 0.0;  // 0: the subcommand's default mesh
  double Lx = 1.0, Ly = 1.0;
  fs::path root;   // empty: GLWIRE_OUT or ./glwire_out
};
int cmd_spectral(const std::string& sub, const SpectralArgs& a, std::ostream& out, std::ostream& err);

/// Theta0 from <root>/spectral/theta0.json when its mesh matches, computed
/// and cached otherwise.
double cached_theta0(const fs::path& root, double T = 10.0, double h = 0.01);

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err);

}  // namespace glwire::app

#pragma once

// Flat INI run configuration. Every key is typed and validated before any
// grid is allocated; unknown sections and keys are errors.
//
//   [domain]  Lx Ly nx ny
//   [current] family J0 a b
//   [physics] kappa c h_ex h2_target
//   [run]     mode scheme dt_factor tol t_max n_proj seed init delta region window
//   [large_domain] eps gamma
//   [output]  root name dump_every

#include <filesystem>
#include <string>

#include "glwire/analysis.hpp"
#include "glwire/io.hpp"

namespace glwire {

enum class RunMode { Wire, LargeDomain };

struct OutputConfig {
  std::string root = "glwire_out";
  std::string name;     // run directory under root; defaults to the config file stem
  long dump_every = 0;  // checkpoint cadence in steps, 0 = final state only
};

struct RunConfig {
  RunMode mode = RunMode::Wire;
  WireCase wire;
  LargeDomainParams large;
  OutputConfig output;
};

/// Throws ConfigError with "origin:line: message".
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& file);

/// Resolved configuration as written into every output file.
json config_to_json(const RunConfig& c);

/// Sweep parameters: kappa, c, eps, delta, J0.
void set_param(RunConfig& c, const std::string& param, double value);

/// Output root: GLWIRE_OUT if set, else the configured root.
std::filesystem::path output_root(const RunConfig& c);

}  // namespace glwire

#include "glwire/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "glwire/errors.hpp"

namespace glwire {

namespace {

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Ctx {
  std::string origin;
  int line = 0;
  std::string key;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + key + ": " + msg);
  }
};

double to_double(const Ctx& c, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x)) c.fail("expects a number, got '" + v + "'");
  return x;
}

long to_long(const Ctx& c, const std::string& v) {
  long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) c.fail("expects an integer, got '" + v + "'");
  return x;
}

template <class E>
E to_enum(const Ctx& c, const std::string& v, const std::map<std::string, E>& names) {
  const auto it = names.find(v);
  if (it == names.end()) {
    std::string opts;
    for (const auto& [k, _] : names) opts += (opts.empty() ? "" : "|") + k;
    c.fail("expects one of " + opts + ", got '" + v + "'");
  }
  return it->second;
}

const std::map<std::string, Scheme> kSchemes{{"explicit", Scheme::Explicit}, {"semi-implicit", Scheme::SemiImplicit}};
const std::map<std::string, InitialData> kInits{{"tapered", InitialData::Tapered},
                                                {"random", InitialData::Random},
                                                {"normal", InitialData::Normal},
                                                {"uniform", InitialData::Uniform}};
const std::map<std::string, RunMode> kModes{{"wire", RunMode::Wire}, {"large_domain", RunMode::LargeDomain}};

template <class E>
std::string enum_name(E v, const std::map<std::string, E>& names) {
  for (const auto& [k, e] : names)
    if (e == v) return k;
  return "";
}

using Setter = std::function<void(RunConfig&, const Ctx&, const std::string&)>;

std::map<std::string, std::map<std::string, Setter>> schema() {
  auto num = [](auto field) -> Setter {
    return [field](RunConfig& r, const Ctx& c, const std::string& v) { field(r, to_double(c, v)); };
  };
  std::map<std::string, std::map<std::string, Setter>> s;
  s["domain"] = {
      {"Lx", num([](RunConfig& r, double x) { r.wire.Lx = r.large.Lx = x; })},
      {"Ly", num([](RunConfig& r, double x) { r.wire.Ly = r.large.Ly = x; })},
      {"nx", [](RunConfig& r, const Ctx& c, const std::string& v) {
         const long n = to_long(c, v);
         if (n < 8) c.fail("needs at least 8 nodes");
         r.wire.nx = r.large.nx = std::size_t(n);
       }},
      {"ny", [](RunConfig& r, const Ctx& c, const std::string& v) {
         const long n = to_long(c, v);
         if (n < 8) c.fail("needs at least 8 nodes");
         r.wire.ny = r.large.ny = std::size_t(n);
       }},
  };
  s["current"] = {
      {"family", [](RunConfig& r, const Ctx& c, const std::string& v) {
         if (v != "zero" && v != "constant" && v != "bump" && v != "cosine")
           c.fail("expects one of zero|constant|bump|cosine, got '" + v + "'");
         r.wire.current.family = r.large.current.family = v;
       }},
      {"J0", num([](RunConfig& r, double x) { r.wire.current.J0 = r.large.current.J0 = x; })},
      {"a", num([](RunConfig& r, double x) { r.wire.current.a = r.large.current.a = x; })},
      {"b", num([](RunConfig& r, double x) { r.wire.current.b = r.large.current.b = x; })},
  };
  s["physics"] = {
      {"kappa", num([](RunConfig& r, double x) { r.wire.phys.kappa = x; })},
      {"c", num([](RunConfig& r, double x) { r.wire.phys.c = x; })},
      {"h_ex", num([](RunConfig& r, double x) { r.wire.phys.h_ex = r.large.h_ex = x; })},
      {"h2_target", num([](RunConfig& r, double x) { r.wire.h2_target = x; })},
  };
  s["run"] = {
      {"mode", [](RunConfig& r, const Ctx& c, const std::string& v) { r.mode = to_enum(c, v, kModes); }},
      {"scheme", [](RunConfig& r, const Ctx& c, const std::string& v) {
         r.wire.scheme = r.large.scheme = to_enum(c, v, kSchemes);
       }},
      {"dt_factor", num([](RunConfig& r, double x) { r.wire.dt_factor = r.large.dt_factor = x; })},
      {"tol", num([](RunConfig& r, double x) { r.wire.tol = r.large.tol = x; })},
      {"t_max", num([](RunConfig& r, double x) { r.wire.t_max = r.large.t_max = x; })},
      {"n_proj", [](RunConfig& r, const Ctx& c, const std::string& v) {
         const long n = to_long(c, v);
         if (n < 1) c.fail("must be at least 1");
         r.wire.n_proj = int(n);
       }},
      {"seed", [](RunConfig& r, const Ctx& c, const std::string& v) {
         const long n = to_long(c, v);
         if (n < 0) c.fail("must be nonnegative");
         r.wire.seed = r.large.seed = std::uint64_t(n);
       }},
      {"init", [](RunConfig& r, const Ctx& c, const std::string& v) {
         r.wire.init = r.large.init = to_enum(c, v, kInits);
       }},
      {"delta", num([](RunConfig& r, double x) { r.wire.delta = r.large.delta = x; })},
      {"region", [](RunConfig& r, const Ctx& c, const std::string& v) {
         const long n = to_long(c, v);
         if (n != 1 && n != 2) c.fail("must be 1 or 2");
         r.wire.region = int(n);
       }},
      {"window", num([](RunConfig& r, double x) { r.wire.window = r.large.window = x; })},
  };
  s["large_domain"] = {
      {"eps", num([](RunConfig& r, double x) { r.large.eps = x; })},
      {"gamma", num([](RunConfig& r, double x) { r.large.gamma = x; })},
  };
  s["output"] = {
      {"root", [](RunConfig& r, const Ctx&, const std::string& v) { r.output.root = v; }},
      {"name", [](RunConfig& r, const Ctx&, const std::string& v) { r.output.name = v; }},
      {"dump_every", [](RunConfig& r, const Ctx& c, const std::string& v) {
         const long n = to_long(c, v);
         if (n < 0) c.fail("must be nonnegative");
         r.output.dump_every = n;
       }},
  };
  return s;
}

struct Where {
  std::map<std::string, int> line;  // "section.key" -> line
  int of(const std::string& k) const {
    const auto it = line.find(k);
    return it == line.end() ? 0 : it->second;
  }
};

void validate(const RunConfig& r, const std::string& origin, const Where& w) {
  auto fail = [&](const std::string& keys, const std::string& msg) {
    const std::string first = keys.substr(0, keys.find(','));
    throw ConfigError(origin + ":" + std::to_string(w.of(first)) + ": " + keys + ": " + msg);
  };
  const auto& c = r.wire;
  if (!(c.Lx > 0.0) || !(c.Ly > 0.0)) fail("domain.Lx,domain.Ly", "lengths must be positive");
  const double hx = c.Lx / double(c.nx - 1), hy = c.Ly / double(c.ny - 1);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy))
    fail("domain.nx,domain.ny,domain.Lx,domain.Ly",
         "cells are not square (Lx/(nx-1) = " + fmt(hx) + ", Ly/(ny-1) = " + fmt(hy) + ")");
  if (c.current.family == "cosine" && !(std::abs(c.current.a) < 1.0 && std::abs(c.current.b) < 1.0))
    fail("current.a,current.b", "cosine amplitudes must lie in (-1, 1)");
  if (!(c.phys.kappa >= 1.0)) fail("physics.kappa", "must be at least 1");
  if (!(c.phys.c > 0.0)) fail("physics.c", "must be positive");
  if (!(c.dt_factor > 0.0)) fail("run.dt_factor", "must be positive");
  if (!(c.tol > 0.0)) fail("run.tol", "must be positive");
  if (!(c.t_max > 0.0)) fail("run.t_max", "must be positive");
  if (!(c.delta > 0.0)) fail("run.delta", "must be positive");
  if (!(c.window > 0.0 && c.window <= 1.0)) fail("run.window", "must lie in (0, 1]");
  if (r.mode == RunMode::LargeDomain) {
    if (!(r.large.eps > 0.0 && r.large.eps < 1.0)) fail("large_domain.eps", "must lie in (0, 1)");
    if (!(r.large.gamma > 0.0 && r.large.gamma < 1.0)) fail("large_domain.gamma", "must lie in (0, 1)");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  // Large-domain runs default to the looser tolerance and shorter horizon of
  // LargeDomainParams unless the [run] keys say otherwise.
  RunConfig r;
  const auto s = schema();
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::string> seen;
  Where where;
  Ctx ctx{origin, 0, ""};
  while (std::getline(in, raw)) {
    ++ctx.line;
    ctx.key.clear();
    std::string line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!s.count(section)) {
        ctx.key = "[" + section + "]";
        ctx.fail("unknown section");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    ctx.key = section.empty() ? key : section + "." + key;
    if (section.empty()) ctx.fail("key outside of any section");
    const auto& keys = s.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) ctx.fail("unknown key");
    if (!seen.insert(ctx.key).second) ctx.fail("duplicate key");
    if (value.empty()) ctx.fail("empty value");
    it->second(r, ctx, value);
    where.line[ctx.key] = ctx.line;
  }
  validate(r, origin, where);
  return r;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::string text;
  try {
    text = read_file(file);
  } catch (const Error&) {
    throw ConfigError(file.string() + ": cannot read config");
  }
  RunConfig r = parse_config(text, file.string());
  if (r.output.name.empty()) r.output.name = file.stem().string();
  return r;
}

json config_to_json(const RunConfig& r) {
  const auto& c = r.wire;
  json j;
  j["domain"] = {{"Lx", c.Lx}, {"Ly", c.Ly}, {"nx", c.nx}, {"ny", c.ny}};
  j["current"] = {{"family", c.current.family}, {"J0", c.current.J0}, {"a", c.current.a}, {"b", c.current.b}};
  j["physics"] = {{"kappa", c.phys.kappa}, {"c", c.phys.c}, {"h_ex", c.phys.h_ex}};
  if (c.h2_target) j["physics"]["h2_target"] = *c.h2_target;
  j["run"] = {{"mode", enum_name(r.mode, kModes)},
              {"scheme", enum_name(c.scheme, kSchemes)},
              {"dt_factor", c.dt_factor},
              {"tol", c.tol},
              {"t_max", c.t_max},
              {"n_proj", c.n_proj},
              {"seed", c.seed},
              {"init", enum_name(c.init, kInits)},
              {"delta", c.delta},
              {"region", c.region},
              {"window", c.window}};
  if (r.mode == RunMode::LargeDomain) j["large_domain"] = {{"eps", r.large.eps}, {"gamma", r.large.gamma}};
  j["output"] = {{"name", r.output.name}, {"dump_every", r.output.dump_every}};
  return j;
}

void set_param(RunConfig& r, const std::string& p, double v) {
  if (p == "kappa") {
    if (r.mode != RunMode::Wire) throw ConfigError("sweep kappa: large-domain runs fix kappa = 1/eps");
    if (!(v >= 1.0)) throw ConfigError("sweep kappa: values must be at least 1");
    r.wire.phys.kappa = v;
  } else if (p == "c") {
    if (!(v > 0.0)) throw ConfigError("sweep c: values must be positive");
    r.wire.phys.c = v;
  } else if (p == "eps") {
    if (r.mode != RunMode::LargeDomain) throw ConfigError("sweep eps: needs run.mode = large_domain");
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("sweep eps: values must lie in (0, 1)");
    r.large.eps = v;
  } else if (p == "delta") {
    if (!(v > 0.0)) throw ConfigError("sweep delta: values must be positive");
    r.wire.delta = r.large.delta = v;
  } else if (p == "J0") {
    r.wire.current.J0 = r.large.current.J0 = v;
  } else {
    throw ConfigError("unknown sweep parameter '" + p + "' (kappa|c|eps|delta|J0)");
  }
}

std::filesystem::path output_root(const RunConfig& c) {
  if (const char* e = std::getenv("GLWIRE_OUT"); e && *e) return e;
  return c.output.root;
}

}  // namespace glwire

#include "glwire/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "glwire/errors.hpp"

namespace glwire {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& file, std::string_view bytes) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

const char* location_name(FieldLocation l) {
  switch (l) {
    case FieldLocation::Nodes: return "nodes";
    case FieldLocation::Links: return "links";
    case FieldLocation::Plaquettes: return "plaquettes";
  }
  return "";
}

std::string to_bytes(std::span<const double> v) {
  std::string s(v.size() * sizeof(double), '\0');
  if (!v.empty()) std::memcpy(s.data(), v.data(), s.size());
  return s;
}

json grid_json(const Grid& g) { return json{{"nx", g.nx()}, {"ny", g.ny()}, {"h", g.h()}}; }

}  // namespace

std::size_t field_size(const Grid& g, FieldLocation loc) {
  switch (loc) {
    case FieldLocation::Nodes: return g.num_nodes();
    case FieldLocation::Links: return g.num_links();
    case FieldLocation::Plaquettes: return g.num_plaquettes();
  }
  return 0;
}

void write_field(const fs::path& dir, const std::string& name, const Grid& g, std::span<const double> data,
                 FieldLocation loc, const std::string& units) {
  if (data.size() != field_size(g, loc)) throw DomainError("field " + name + " has the wrong size");
  const std::string bytes = to_bytes(data);
  write_file(dir / (name + ".bin"), bytes);
  json h{{"name", name},       {"units", units},        {"location", location_name(loc)},
         {"grid", grid_json(g)}, {"count", data.size()}, {"dtype", "f64le"},
         {"order", "row-major, x fastest"}, {"sha256", sha256_hex(bytes)}};
  write_file(dir / (name + ".json"), h.dump(2) + "\n");
}

RealField read_field(const fs::path& dir, const std::string& name, json* header) {
  const json h = json::parse(read_file(dir / (name + ".json")));
  const std::string bytes = read_file(dir / (name + ".bin"));
  const std::size_t n = h.at("count").get<std::size_t>();
  if (bytes.size() != n * sizeof(double)) throw Error("field " + name + ": size mismatch");
  if (sha256_hex(bytes) != h.at("sha256").get<std::string>()) throw Error("field " + name + ": hash mismatch");
  RealField v(n);
  if (n) std::memcpy(v.data(), bytes.data(), bytes.size());
  if (header) *header = h;
  return v;
}

json mask_to_rle(const Grid& g, const Mask& m) {
  json runs = json::array();
  const bool first = !m.empty() && m[0];
  bool cur = first;
  std::size_t len = 0;
  for (auto v : m) {
    if (bool(v) == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = bool(v);
      len = 1;
    }
  }
  if (!m.empty()) runs.push_back(len);
  return json{{"nx", g.nx()}, {"ny", g.ny()}, {"first", first ? 1 : 0}, {"runs", runs}};
}

Mask mask_from_rle(const json& j) {
  const std::size_t n = j.at("nx").get<std::size_t>() * j.at("ny").get<std::size_t>();
  Mask m;
  m.reserve(n);
  bool cur = j.at("first").get<int>() != 0;
  for (const auto& r : j.at("runs")) {
    m.insert(m.end(), r.get<std::size_t>(), std::uint8_t(cur));
    cur = !cur;
  }
  if (m.size() != n) throw Error("RLE mask length does not match the grid");
  return m;
}

CheckpointMeta CheckpointMeta::of(const TdglSystem& sys) {
  return CheckpointMeta{sys.grid(), sys.params(), sys.scheme(), sys.dt()};
}

void write_checkpoint(const fs::path& dir, const CheckpointMeta& m, const GLState& s, const json& config) {
  std::vector<double> blob;
  blob.reserve(2 * s.psi.size() + s.A.size() + s.phi.size());
  for (const auto& z : s.psi) {
    blob.push_back(z.real());
    blob.push_back(z.imag());
  }
  blob.insert(blob.end(), s.A.begin(), s.A.end());
  blob.insert(blob.end(), s.phi.begin(), s.phi.end());
  const std::string bytes = to_bytes(blob);
  write_file(dir / "checkpoint.bin", bytes);
  const auto& p = m.phys;
  json h{{"t", s.t},
         {"step", s.step},
         {"grid", grid_json(m.grid)},
         {"physics", {{"kappa", p.kappa}, {"c", p.c}, {"h_ex", p.h_ex}, {"g", p.g}}},
         {"scheme", m.scheme == Scheme::Explicit ? "explicit" : "semi-implicit"},
         {"dt", m.dt},
         {"layout", {{"psi", {"re/im interleaved", s.psi.size()}}, {"A", s.A.size()}, {"phi", s.phi.size()}}},
         {"config", config},
         {"sha256", sha256_hex(bytes)}};
  write_file(dir / "checkpoint.json", h.dump(2) + "\n");
}

void write_checkpoint(const fs::path& dir, const TdglSystem& sys, const GLState& s, const json& config) {
  write_checkpoint(dir, CheckpointMeta::of(sys), s, config);
}

GLState read_checkpoint(const fs::path& dir, const TdglSystem& sys, json* header) {
  const json h = json::parse(read_file(dir / "checkpoint.json"));
  const Grid& g = sys.grid();
  if (h.at("grid") != grid_json(g)) throw Error("checkpoint grid does not match the system");
  const auto& p = sys.params();
  const auto& hp = h.at("physics");
  if (hp.at("kappa") != p.kappa || hp.at("c") != p.c || hp.at("h_ex") != p.h_ex || hp.at("g") != p.g)
    throw Error("checkpoint physics does not match the system");
  const std::string bytes = read_file(dir / "checkpoint.bin");
  if (sha256_hex(bytes) != h.at("sha256").get<std::string>()) throw Error("checkpoint hash mismatch");
  const std::size_t nn = g.num_nodes(), nl = g.num_links();
  if (bytes.size() != (3 * nn + nl) * sizeof(double)) throw Error("checkpoint size mismatch");
  std::vector<double> blob(3 * nn + nl);
  std::memcpy(blob.data(), bytes.data(), bytes.size());
  GLState s;
  s.psi.resize(nn);
  for (std::size_t n = 0; n < nn; ++n) s.psi[n] = cplx(blob[2 * n], blob[2 * n + 1]);
  s.A.assign(blob.begin() + long(2 * nn), blob.begin() + long(2 * nn + nl));
  s.phi.assign(blob.begin() + long(2 * nn + nl), blob.end());
  s.t = h.at("t").get<double>();
  s.step = h.at("step").get<long>();
  if (header) *header = h;
  return s;
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw Error("CSV row has the wrong number of cells");
  std::string r;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) r += ',';
    r += cells[i];
  }
  rows_.push_back(std::move(r));
}

std::string CsvTable::body() const {
  std::string b;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) b += ',';
    b += columns_[i];
  }
  b += '\n';
  for (const auto& r : rows_) b += r + '\n';
  return b;
}

std::string CsvTable::render(const std::string& kind, const json& config) const {
  const std::string b = body();
  return "# glwire " + kind + "\n# config " + config.dump() + "\n# sha256 " + sha256_hex(b) + "\n" + b;
}

void CsvTable::write(const fs::path& file, const std::string& kind, const json& config) const {
  write_file(file, render(kind, config));
}

void CsvTable::append(const fs::path& file, const std::string& kind, const json& config) const {
  // The file is re-rendered so that its hash covers the old rows too.
  CsvTable all(columns_);
  if (fs::exists(file)) {
    std::istringstream in(read_file(file));
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header_seen) {
        if (line != body().substr(0, body().find('\n'))) throw Error(file.string() + ": column mismatch");
        header_seen = true;
        continue;
      }
      all.rows_.push_back(line);
    }
  }
  all.rows_.insert(all.rows_.end(), rows_.begin(), rows_.end());
  all.write(file, kind, config);
}

void write_json_hashed(const fs::path& file, json j) {
  j.erase("sha256");
  const std::string h = sha256_hex(j.dump());
  j["sha256"] = h;
  write_file(file, j.dump(2) + "\n");
}

bool csv_hash_ok(const std::string& text) {
  std::istringstream in(text);
  std::string line, hash, b;
  while (std::getline(in, line)) {
    if (line.rfind("# sha256 ", 0) == 0)
      hash = line.substr(9);
    else if (line.empty() || line[0] != '#')
      b += line + '\n';
  }
  return !hash.empty() && hash == sha256_hex(b);
}

bool json_hash_ok(const json& j) {
  if (!j.is_object() || !j.contains("sha256")) return false;
  json rest = j;
  rest.erase("sha256");
  return j.at("sha256") == sha256_hex(rest.dump());
}

}  // namespace glwire

#pragma once

// On-disk formats: raw little-endian f64 grids with JSON sidecars, RLE masks,
// restartable checkpoints and hashed CSV tables.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glwire/tdgl.hpp"

namespace glwire {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes);

enum class FieldLocation { Nodes, Links, Plaquettes };

std::size_t field_size(const Grid& g, FieldLocation loc);

/// Writes <dir>/<name>.bin and <dir>/<name>.json.
void write_field(const fs::path& dir, const std::string& name, const Grid& g, std::span<const double> data,
                 FieldLocation loc, const std::string& units);
/// Reads a field written by write_field; checks size and hash.
RealField read_field(const fs::path& dir, const std::string& name, json* header = nullptr);

/// {"nx","ny","first","runs"}: alternating run lengths in node order, the
/// first run holding value `first`.
json mask_to_rle(const Grid& g, const Mask& m);
Mask mask_from_rle(const json& j);

/// What a checkpoint header records about the system that produced it.
struct CheckpointMeta {
  Grid grid;
  PhysicsParams phys;
  Scheme scheme = Scheme::SemiImplicit;
  double dt = 0.0;
  static CheckpointMeta of(const TdglSystem& sys);
};

/// psi (re, im interleaved), A, phi as one binary blob plus a JSON header
/// with t, step, grid, physics and the caller's config.
void write_checkpoint(const fs::path& dir, const CheckpointMeta& m, const GLState& s, const json& config = {});
void write_checkpoint(const fs::path& dir, const TdglSystem& sys, const GLState& s, const json& config = {});
/// Restores a state; the header must match the system's grid and physics.
GLState read_checkpoint(const fs::path& dir, const TdglSystem& sys, json* header = nullptr);

/// Deterministic CSV with '#' header lines: a kind tag, the resolved config
/// and the SHA-256 of the data rows (column line included).
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add_row(const std::vector<std::string>& cells);
  std::string body() const;
  std::string render(const std::string& kind, const json& config) const;
  void write(const fs::path& file, const std::string& kind, const json& config) const;
  /// Appends rows to an existing table file (same columns), or creates it.
  void append(const fs::path& file, const std::string& kind, const json& config) const;

private:
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

/// Shortest round-trip decimal form of a double ("nan", "inf" for specials).
std::string fmt(double v);

/// Writes pretty JSON with a "sha256" member computed over the rest.
void write_json_hashed(const fs::path& file, json j);

/// Integrity checks for files written by CsvTable and write_json_hashed.
bool csv_hash_ok(const std::string& text);
bool json_hash_ok(const json& j);

std::string read_file(const fs::path& file);
void write_file(const fs::path& file, std::string_view bytes);

}  // namespace glwire

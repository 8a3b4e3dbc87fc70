#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dpgmg/study.hpp"

namespace dpgmg {

struct ParseError : ConfigError {
  int line;
  ParseError(int line_, const std::string& what)
      : ConfigError("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

struct UnknownKey : ConfigError {
  std::string key;
  explicit UnknownKey(std::string k) : ConfigError("unknown key: " + k), key(std::move(k)) {}
};

struct RangeError : ConfigError {
  std::string key;
  RangeError(std::string k, const std::string& what)
      : ConfigError(k + ": " + what), key(std::move(k)) {}
};

struct RequiredMissing : ConfigError {
  std::string key;
  explicit RequiredMissing(std::string k)
      : ConfigError("required key missing: " + k), key(std::move(k)) {}
};

/// Flat `key = value` document; `#` starts a comment, lists are
/// comma-separated. Unknown keys are rejected. The `study` key is required;
/// everything else has a documented default.
StudyConfig parse_config(std::istream& in);
StudyConfig parse_config_file(const std::string& path);

/// Canonical document containing every key; parse(serialize(cfg)) == cfg.
std::string serialize_config(const StudyConfig& cfg);

inline const char* csv_header() {
  return "grid,ndof,iterations,final_residual,dpg_eta,assembly_s,solve_s";
}

/// One row per record, floating point at round-trip precision.
void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> parse_csv(std::istream& in);

/// Legacy-VTK unstructured snapshot of the solved grid: each active element
/// is subsampled 2x2, point data carries Re p / Im p / |p|, cell data the
/// element indicator and polynomial order.
void write_vtk(std::ostream& out, const Assembled& a, const Vec& xhat);

struct VtkSummary {
  int n_points = 0;
  int n_cells = 0;
  std::vector<std::pair<std::string, int>> point_fields;  ///< name, value count
  std::vector<std::pair<std::string, int>> cell_fields;
};

/// Minimal structural reader for the files write_vtk emits; throws
/// ParseError on schema violations.
VtkSummary parse_vtk(std::istream& in);

/// Invariant suite on tiny meshes; prints one line per check and returns 0
/// when every check passes.
int run_selftest(std::ostream& log);

}  // namespace dpgmg

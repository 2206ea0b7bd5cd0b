#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rmp {

// Provenance of a run. Wall-clock time is left out so outputs stay reproducible.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::string scenario;       // built-in name or file path
  std::string scenario_json;  // canonical serialized scenario
  std::uint64_t seed = 0;
  double horizon = 0.0;
  std::size_t steps = 0;
  std::size_t paths = 0;
  std::vector<std::pair<std::string, std::string>> options;  // subcommand flags

  std::string to_json() const;  // compact, keys in fixed order
  std::string hash() const;     // FNV-1a 64 of to_json(), 16 hex digits
};

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void add(const std::vector<double>& row);
};

// Shortest round-trip decimal form.
std::string format_number(double value);

std::string render_csv(const Table& table, const RunManifest& manifest);

// Writes <out_dir>/<name>.csv per table and returns the paths. I/O errors are
// raised as std::runtime_error with the system message.
std::vector<std::string> emit_report(const std::vector<Table>& tables, const RunManifest& manifest,
                                     const std::string& out_dir);

}  // namespace rmp

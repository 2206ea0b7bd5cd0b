#include "rmp/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <system_error>

#include "rmp/core.hpp"

namespace rmp {

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "rmp";
  j["version"] = tool_version;
  j["subcommand"] = subcommand;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["horizon"] = horizon;
  j["steps"] = steps;
  j["paths"] = paths;
  nlohmann::ordered_json opts = nlohmann::ordered_json::object();
  for (const auto& [k, v] : options) opts[k] = v;
  j["options"] = opts;
  j["config_hash"] = [&] {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : scenario_json) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  }();
  return j.dump();
}

std::string RunManifest::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_json()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw ConfigError("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                      std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

void Table::add(const std::vector<double>& row) {
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (double v : row) cells.push_back(format_number(v));
  add(std::move(cells));
}

namespace {

std::string escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string render_csv(const Table& table, const RunManifest& manifest) {
  std::string out = "# manifest " + manifest.to_json() + "\n# manifest_hash " + manifest.hash() + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + escape(table.columns[i]);
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + escape(row[i]);
    out += "\n";
  }
  return out;
}

std::vector<std::string> emit_report(const std::vector<Table>& tables, const RunManifest& manifest,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir + ": " + ec.message());
  std::vector<std::string> paths;
  for (const Table& t : tables) {
    const fs::path path = fs::path(out_dir) / (t.name + ".csv");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + ": " + std::generic_category().message(errno));
    os << render_csv(t, manifest);
    os.close();
    if (!os) throw std::runtime_error("cannot write " + path.string() + ": " + std::generic_category().message(errno));
    paths.push_back(path.string());
  }
  return paths;
}

}  // namespace rmp

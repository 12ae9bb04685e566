#include "sirs/app/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "sirs/errors.hpp"
#include "sirs/scenario_io.hpp"

#ifndef SIRSLAB_VERSION
#define SIRSLAB_VERSION "0.0.0"
#endif

namespace sirs::app {

std::string format_number(double value) {
  if (std::isnan(value)) return ".nan";
  if (std::isinf(value)) return value > 0 ? ".inf" : "-.inf";
  return fmt::format("{}", value);
}

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  out += '"';
  return out;
}

Report::Report(std::string command, const Scenario& scenario)
    : command_(std::move(command)), scenario_(scenario) {}

void Report::add(std::string key, double value, std::string source) {
  if (source.empty()) throw std::logic_error("report entry without a source: " + key);
  entries_.push_back({std::move(key), format_number(value), std::move(source)});
}

void Report::add(std::string key, long value, std::string source) {
  if (source.empty()) throw std::logic_error("report entry without a source: " + key);
  entries_.push_back({std::move(key), fmt::format("{}", value), std::move(source)});
}

void Report::add(std::string key, bool value, std::string source) {
  if (source.empty()) throw std::logic_error("report entry without a source: " + key);
  entries_.push_back({std::move(key), value ? "true" : "false", std::move(source)});
}

void Report::add_text(std::string key, std::string_view value, std::string source) {
  if (source.empty()) throw std::logic_error("report entry without a source: " + key);
  entries_.push_back({std::move(key), quote(value), std::move(source)});
}

void Report::add_artifact(std::string key, const std::filesystem::path& file) {
  artifacts_.push_back(fmt::format("{}: {}", key, quote(file.filename().string())));
}

void Report::add_timing(std::string stage, double seconds) {
  timings_.emplace_back(std::move(stage), seconds);
}

std::string Report::value_of(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return e.value;
  }
  return {};
}

std::string Report::text() const {
  std::string out;
  out += "tool: sirslab\n";
  out += fmt::format("version: {}\n", quote(SIRSLAB_VERSION));
  out += fmt::format("command: {}\n", command_);
  out += fmt::format("scenario_hash: {}\n", quote(scenario_hash(scenario_)));
  out += "scenario:\n";
  std::istringstream lines(serialize_scenario(scenario_));
  for (std::string line; std::getline(lines, line);) out += "  " + line + "\n";
  out += "results:\n";
  if (entries_.empty()) out += "  {}\n";
  for (const auto& e : entries_) {
    out += fmt::format("  {}: {{value: {}, source: {}}}\n", e.key, e.value, quote(e.source));
  }
  if (!artifacts_.empty()) {
    out += "artifacts:\n";
    for (const auto& a : artifacts_) out += "  " + a + "\n";
  }
  return out;
}

std::string Report::timings_text() const {
  std::string out = fmt::format("command: {}\nstages:\n", command_);
  if (timings_.empty()) out += "  {}\n";
  for (const auto& [stage, seconds] : timings_) {
    out += fmt::format("  {}: {:.6f}\n", stage, seconds);
  }
  return out;
}

void Report::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_text(dir / "report.yaml", text());
  write_text(dir / "timings.yaml", timings_text());
}

LoadedReport parse_report(std::string_view text, std::string_view source) {
  LoadedReport out;
  try {
    out.root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ValidationError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  if (!out.root.IsMap() || !out.root["tool"] || out.root["tool"].as<std::string>() != "sirslab" ||
      !out.root["scenario"] || !out.root["scenario_hash"]) {
    throw ValidationError(fmt::format("{}: not a sirslab report", source));
  }
  out.command = out.root["command"].as<std::string>("");
  out.hash = out.root["scenario_hash"].as<std::string>();
  out.scenario = scenario_from_yaml(out.root["scenario"], source);
  const std::string recomputed = scenario_hash(out.scenario);
  if (recomputed != out.hash) {
    throw ValidationError(fmt::format("{}: scenario hash {} does not match embedded scenario ({})",
                                      source, out.hash, recomputed));
  }
  return out;
}

LoadedReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open report '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_report(buffer.str(), path.string());
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw std::logic_error(fmt::format("table row has {} cells, expected {}", cells.size(),
                                       columns_.size()));
  }
  rows_.push_back(std::move(cells));
}

void Table::row_numbers(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  row(std::move(cells));
}

std::string Table::text() const {
  std::string out = fmt::format("{}\n", fmt::join(columns_, "\t"));
  for (const auto& r : rows_) out += fmt::format("{}\n", fmt::join(r, "\t"));
  return out;
}

void Table::write(const std::filesystem::path& file) const { write_text(file, text()); }

void write_text(const std::filesystem::path& file, std::string_view text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", file.string()));
  out << text;
}

}  // namespace sirs::app

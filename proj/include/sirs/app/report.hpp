#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sirs/coeffs.hpp"

namespace sirs::app {

/// Shortest round-trip decimal text; YAML spellings for the non-finite values.
std::string format_number(double value);

/// Double-quoted YAML scalar.
std::string quote(std::string_view text);

// Key/value run report. Results are kept in insertion order and each one carries the
// module call that produced it. Wall-clock timings live in a separate document so that
// the report text is a pure function of the inputs.
class Report {
 public:
  struct Entry {
    std::string key;
    std::string value;  // already YAML-formatted
    std::string source;
  };

  Report(std::string command, const Scenario& scenario);

  void add(std::string key, double value, std::string source);
  void add(std::string key, long value, std::string source);
  void add(std::string key, int value, std::string source) {
    add(std::move(key), static_cast<long>(value), std::move(source));
  }
  void add(std::string key, bool value, std::string source);
  void add_text(std::string key, std::string_view value, std::string source);
  void add_artifact(std::string key, const std::filesystem::path& file);
  void add_timing(std::string stage, double seconds);

  const std::string& command() const { return command_; }
  const Scenario& scenario() const { return scenario_; }
  const std::vector<Entry>& entries() const { return entries_; }
  /// Value text of `key`, or empty when absent.
  std::string value_of(std::string_view key) const;

  std::string text() const;
  std::string timings_text() const;
  /// Writes report.yaml and timings.yaml into `dir`.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  Scenario scenario_;
  std::vector<Entry> entries_;
  std::vector<std::string> artifacts_;
  std::vector<std::pair<std::string, double>> timings_;
};

/// Parsed report document with its embedded scenario.
struct LoadedReport {
  YAML::Node root;
  std::string command;
  std::string hash;
  Scenario scenario;
};

/// Throws ValidationError when the file is not a report or the scenario hash disagrees
/// with the embedded scenario.
LoadedReport load_report(const std::filesystem::path& path);
LoadedReport parse_report(std::string_view text, std::string_view source = "<report>");

/// Tab-separated table with one header row.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);
  void row(std::vector<std::string> cells);
  void row_numbers(const std::vector<double>& values);
  std::string text() const;
  void write(const std::filesystem::path& file) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& file, std::string_view text);

}  // namespace sirs::app

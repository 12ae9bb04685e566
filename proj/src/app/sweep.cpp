#include "sirs/app/sweep.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sirs/app/commands.hpp"
#include "sirs/errors.hpp"
#include "sirs/scenario_io.hpp"

namespace sirs::app {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kOutputs{"eigen", "speed", "stationary", "simulate"};

[[noreturn]] void fail(std::string_view source, const YAML::Node& node, std::string_view key,
                       std::string_view reason) {
  throw ValidationError(
      fmt::format("{}:{}: key '{}': {}", source, node.Mark().line + 1, key, reason));
}

std::vector<std::string> output_columns(const std::string& output) {
  if (output == "eigen") return {"lambda1"};
  if (output == "speed") return {"w_lower", "w_upper"};
  if (output == "stationary") return {"stationary_status", "I_star_mean", "contraction"};
  return {"classification", "front_speed", "sup_I_final"};
}

std::vector<std::string> output_keys(const std::string& output) {
  if (output == "eigen") return {"eigen.lambda1"};
  if (output == "speed") return {"speed.dir0.lower", "speed.dir0.upper"};
  if (output == "stationary") {
    return {"stationary.status", "stationary.I_star.mean", "stationary.contraction_estimate"};
  }
  return {"simulate.classification", "simulate.front.dir0.speed", "simulate.sup_I_final"};
}

std::string cell_text(std::string value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    value = value.substr(1, value.size() - 2);
  }
  for (char& ch : value) {
    if (ch == '\t' || ch == '\n') ch = ' ';
  }
  return value.empty() ? "NA" : value;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SweepSpec parse_sweep(std::string_view text, std::string_view source, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ValidationError(fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  if (!root.IsMap()) throw ValidationError(fmt::format("{}: sweep must be a mapping", source));
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "base" && key != "axes" && key != "outputs" && key != "cap") {
      fail(source, kv.first, key, "unknown key");
    }
  }
  SweepSpec spec;
  const YAML::Node base = root["base"];
  if (!base) throw ValidationError(fmt::format("{}: key 'base': missing", source));
  if (base.IsScalar()) {
    spec.base = load_scenario(base_dir / base.as<std::string>());
  } else {
    spec.base = scenario_from_yaml(base, source);
  }
  if (const YAML::Node axes = root["axes"]) {
    if (!axes.IsSequence()) fail(source, axes, "axes", "expected a list");
    for (const auto& a : axes) {
      SweepAxis axis;
      if (!a.IsMap() || !a["parameter"] || !a["values"] || !a["values"].IsSequence()) {
        fail(source, a, "axes", "each axis needs 'parameter' and a 'values' list");
      }
      axis.parameter = a["parameter"].as<std::string>();
      for (const auto& v : a["values"]) {
        double x = 0.0;
        try {
          x = v.as<double>();
        } catch (const YAML::Exception&) {
          fail(source, v, "values", "not a number");
        }
        if (!std::isfinite(x)) fail(source, v, "values", "axis values must be finite");
        axis.values.push_back(x);
      }
      if (axis.values.empty()) fail(source, a, "values", "empty axis");
      with_parameter(spec.base, axis.parameter, axis.values.front());
      spec.axes.push_back(std::move(axis));
    }
  }
  if (const YAML::Node outputs = root["outputs"]) {
    if (!outputs.IsSequence()) fail(source, outputs, "outputs", "expected a list");
    for (const auto& o : outputs) {
      const auto name = o.as<std::string>();
      if (std::find(kOutputs.begin(), kOutputs.end(), name) == kOutputs.end()) {
        fail(source, o, "outputs", fmt::format("unknown output '{}'", name));
      }
      spec.outputs.push_back(name);
    }
  } else {
    spec.outputs = {"eigen", "speed", "stationary"};
  }
  if (const YAML::Node cap = root["cap"]) {
    const long c = cap.as<long>(-1);
    if (c <= 0) fail(source, cap, "cap", "must be a positive integer");
    spec.cap = static_cast<std::size_t>(c);
  }
  if (cell_count(spec) > spec.cap) {
    throw ValidationError(fmt::format("{}: sweep has {} cells, above the cap of {}", source,
                                      cell_count(spec), spec.cap));
  }
  return spec;
}

SweepSpec load_sweep(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open sweep file '{}'", path.string()));
  return parse_sweep(read_file(path), path.string(), path.parent_path());
}

std::string sweep_hash(const SweepSpec& spec) {
  std::string canonical = serialize_scenario(spec.base);
  for (const auto& a : spec.axes) {
    canonical += a.parameter;
    for (double v : a.values) canonical += " " + format_number(v);
    canonical += "\n";
  }
  for (const auto& o : spec.outputs) canonical += o + " ";
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

std::size_t cell_count(const SweepSpec& spec) {
  std::size_t n = 1;
  for (const auto& a : spec.axes) n *= a.values.size();
  return n;
}

std::vector<double> cell_values(const SweepSpec& spec, std::size_t index) {
  std::vector<double> out(spec.axes.size());
  for (std::size_t k = spec.axes.size(); k-- > 0;) {
    const auto& vals = spec.axes[k].values;
    out[k] = vals[index % vals.size()];
    index /= vals.size();
  }
  return out;
}

SweepOutcome run_sweep(const SweepSpec& spec, const fs::path& dir, int workers) {
  std::vector<std::string> columns{"cell"};
  for (const auto& a : spec.axes) columns.push_back(a.parameter);
  columns.push_back("status");
  for (const auto& o : spec.outputs) {
    for (auto& c : output_columns(o)) columns.push_back(std::move(c));
  }
  columns.push_back("error");

  const std::size_t n = cell_count(spec);
  fs::create_directories(dir / "cells");
  write_text(dir / "sweep.yaml",
             fmt::format("sweep_hash: {}\ncells: {}\n", quote(sweep_hash(spec)), n));

  std::vector<std::string> rows(n);
  std::vector<char> reused(n, 0), failed(n, 0);

  auto run_cell = [&](std::size_t index) {
    const fs::path cell_dir = dir / "cells" / fmt::format("cell_{:04d}", index);
    if (fs::exists(cell_dir / "done") && fs::exists(cell_dir / "row.tsv")) {
      rows[index] = read_file(cell_dir / "row.tsv");
      reused[index] = 1;
      failed[index] = rows[index].find("\tfailed\t") != std::string::npos;
      return;
    }
    const std::vector<double> values = cell_values(spec, index);
    std::vector<std::string> cells{fmt::format("{}", index)};
    for (double v : values) cells.push_back(format_number(v));
    std::string status = "ok", error;
    std::vector<std::string> results;
    try {
      Scenario s = spec.base;
      for (std::size_t k = 0; k < values.size(); ++k) {
        s = with_parameter(s, spec.axes[k].parameter, values[k]);
      }
      Report report("sweep", s);
      for (const auto& o : spec.outputs) {
        if (o == "eigen") eigen_stage(s, {}, report, nullptr, nullptr);
        if (o == "speed") speed_stage(s, report, nullptr, nullptr);
        if (o == "stationary") stationary_stage(s, report, nullptr, nullptr);
        if (o == "simulate") simulate_stage(s, report, nullptr, nullptr);
      }
      for (const auto& o : spec.outputs) {
        for (const auto& key : output_keys(o)) results.push_back(cell_text(report.value_of(key)));
      }
      fs::create_directories(cell_dir);
      write_text(cell_dir / "report.yaml", report.text());
    } catch (const std::exception& e) {
      status = "failed";
      error = e.what();
    } catch (...) {
      status = "failed";
      error = "unknown failure";
    }
    cells.push_back(status);
    if (status == "failed") {
      for (const auto& o : spec.outputs) {
        for (std::size_t k = 0; k < output_columns(o).size(); ++k) cells.push_back("NA");
      }
      failed[index] = 1;
    } else {
      for (auto& r : results) cells.push_back(std::move(r));
    }
    cells.push_back(error.empty() ? "-" : cell_text(error));
    rows[index] = fmt::format("{}\n", fmt::join(cells, "\t"));
    write_text(cell_dir / "row.tsv", rows[index]);
    write_text(cell_dir / "done", "");
  };

  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) run_cell(i);
    });
  }
  for (auto& th : pool) th.join();

  SweepOutcome outcome;
  outcome.table = Table(columns);
  outcome.cells = n;
  std::string text = fmt::format("{}\n", fmt::join(columns, "\t"));
  for (std::size_t i = 0; i < n; ++i) {
    text += rows[i];
    std::vector<std::string> cells;
    std::string row = rows[i];
    if (!row.empty() && row.back() == '\n') row.pop_back();
    std::istringstream in(row);
    for (std::string c; std::getline(in, c, '\t');) cells.push_back(c);
    outcome.table.row(std::move(cells));
    outcome.reused += reused[i];
    outcome.failed += failed[i];
  }
  outcome.computed = n - outcome.reused;
  write_text(dir / "table.tsv", text);
  return outcome;
}

}  // namespace sirs::app

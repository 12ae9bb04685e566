#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sirs/app/report.hpp"
#include "sirs/coeffs.hpp"

namespace sirs::app {

struct SweepAxis {
  std::string parameter;  // dotted scenario path
  std::vector<double> values;
};

// Sweep files:
//
//   base: hom1.yaml            # relative to the sweep file, or an inline scenario mapping
//   axes:
//     - {parameter: lambda.value, values: [2, 5, 10, 1e6]}
//   outputs: [eigen, speed, stationary, simulate]
//   cap: 10000
struct SweepSpec {
  Scenario base;
  std::vector<SweepAxis> axes;
  std::vector<std::string> outputs;
  std::size_t cap = 10000;
};

SweepSpec parse_sweep(std::string_view text, std::string_view source = "<sweep>",
                      const std::filesystem::path& base_dir = {});
SweepSpec load_sweep(const std::filesystem::path& path);
std::string sweep_hash(const SweepSpec& spec);

/// Number of cells in the cross-product (1 for an empty axis list).
std::size_t cell_count(const SweepSpec& spec);
/// Axis values of cell `index`; the last axis varies fastest.
std::vector<double> cell_values(const SweepSpec& spec, std::size_t index);

struct SweepOutcome {
  Table table{{}};
  std::size_t cells = 0, computed = 0, reused = 0, failed = 0;
};

/// Runs every cell not yet marked done under `dir`/cells and writes `dir`/table.tsv.
/// `workers` <= 0 uses the hardware concurrency.
SweepOutcome run_sweep(const SweepSpec& spec, const std::filesystem::path& dir, int workers = 0);

}  // namespace sirs::app

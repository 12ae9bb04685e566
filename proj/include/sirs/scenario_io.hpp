#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <yaml-cpp/yaml.h>

#include "sirs/coeffs.hpp"

namespace sirs {

// Scenario files are YAML documents, one nested table per coefficient:
//
//   name: hom1
//   dimension: 1
//   d: 1.0
//   alpha:  {kind: constant, value: 1.0}
//   mu:     {kind: cosine, mean: 1.0, terms: [{amplitude: 0.5, frequency: [1], phase: 0.0}]}
//   lambda: {kind: piecewise, breakpoints: [0.5], values: [20, 10], axis: 0}
//   S0:     {kind: constant, value: 2.0}
//   I0:     {center: [0.0], radius: 1.0, height: 0.1}
//   cell:   {resolution: 128}
//   domain: {half_width: 300, step: 0.03125, boundary: periodic}
//   time:   {dt: auto, final: 120, snapshot_interval: 10, trace_interval: 0.5}
//   front:  {threshold: auto}
//   tolerances: {eigen: 1e-9, ...}
//
// Every key other than the coefficients and `I0` is optional. Unknown keys are rejected.
// Errors are ValidationError with "<source>:<line>: key '<key>': <reason>".

Scenario parse_scenario(std::string_view text, std::string_view source = "<string>");
Scenario scenario_from_yaml(const YAML::Node& root, std::string_view source = "<yaml>");
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// Returns a copy with the numeric entry at dotted `path` (e.g. "lambda.value",
/// "mu.terms.0.amplitude", "d") replaced by `value`.
Scenario with_parameter(const Scenario& scenario, std::string_view path, double value);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

}  // namespace sirs

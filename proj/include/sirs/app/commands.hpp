#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sirs/app/report.hpp"
#include "sirs/coeffs.hpp"

namespace sirs::app {

enum ExitCode : int { success = 0, validation_failure = 2, solver_failure = 3 };

/// $SIRS_OUTPUT_ROOT, or ./sirs_output when unset.
std::filesystem::path output_root();

/// <root>/<command>/<scenario name>-<first 8 hex digits of the scenario hash>
std::filesystem::path run_directory(const std::filesystem::path& root, std::string_view command,
                                    const Scenario& scenario);

// Stages shared by the subcommands and by sweep cells. Each one appends its results to
// `report`, writes tables under `artifacts` when non-null and prints a short summary to
// `log` when non-null.

void eigen_stage(const Scenario& scenario, const std::vector<double>& rho_values, Report& report,
                 const std::filesystem::path* artifacts, std::ostream* log);
void speed_stage(const Scenario& scenario, Report& report, const std::filesystem::path* artifacts,
                 std::ostream* log);
/// A disease-free scenario is a result, not an error: it is recorded and reported.
void stationary_stage(const Scenario& scenario, Report& report,
                      const std::filesystem::path* artifacts, std::ostream* log);
void simulate_stage(const Scenario& scenario, Report& report,
                    const std::filesystem::path* artifacts, std::ostream* log);

struct ThresholdStep {
  double value = 0.0;
  double lambda1 = 0.0;
};

struct ThresholdResult {
  std::string parameter;
  double lo = 0.0, hi = 0.0;
  double lambda_lo = 0.0, lambda_hi = 0.0;
  bool sign_change = false;
  double critical = 0.0;  // midpoint of the final bracket
  double bracket_width = 0.0;
  std::vector<ThresholdStep> steps;
};

/// Bisection on one scalar parameter for the sign change of lambda1(-d Lap - gamma*).
ThresholdResult threshold_bisection(const Scenario& scenario, std::string_view parameter,
                                    double lo, double hi, double tolerance = 1e-4);
void threshold_stage(const Scenario& scenario, std::string_view parameter, double lo, double hi,
                     double tolerance, Report& report, const std::filesystem::path* artifacts,
                     std::ostream* log);

/// Full command line front end. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sirs::app

#include "sirs/app/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sirs/app/sweep.hpp"
#include "sirs/errors.hpp"
#include "sirs/evolution.hpp"
#include "sirs/principal_eigen.hpp"
#include "sirs/scenario_io.hpp"
#include "sirs/speeds.hpp"
#include "sirs/stationary.hpp"

namespace sirs::app {

namespace fs = std::filesystem;

namespace {

class StageTimer {
 public:
  StageTimer(Report& report, std::string stage)
      : report_(report), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    report_.add_timing(stage_, elapsed.count());
  }

 private:
  Report& report_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

std::string eigen_source(const char* call, const DerivedCoefficients& c) {
  return fmt::format("principal_eigen.{}(resolution={}, tol={}, residual_tol={})", call,
                     c.grid.points, format_number(c.tol.eigen),
                     format_number(c.tol.eigen_residual));
}

std::string vector_text(const Vec& v) {
  std::vector<std::string> parts;
  for (Index i = 0; i < v.size(); ++i) parts.push_back(format_number(v(i)));
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

void line(std::ostream* log, const std::string& text) {
  if (log) *log << text << '\n';
}

std::vector<Vec> speed_directions(int dimension) {
  std::vector<Vec> out;
  if (dimension == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  Vec e(2);
  e << 1.0, 0.0;
  out.push_back(e);
  e << 0.0, 1.0;
  out.push_back(e);
  e << std::sqrt(0.5), std::sqrt(0.5);
  out.push_back(e);
  return out;
}

void write_scan(const fs::path& file, const SpeedResult& r) {
  Table t({"r", "k", "value", "evaluated"});
  for (const auto& row : r.scan) {
    t.row({format_number(row.r), format_number(row.k), format_number(row.value),
           row.evaluated ? "1" : "0"});
  }
  t.write(file);
}

void add_field_summary(Report& report, const std::string& key, const Field& f,
                       const std::string& source) {
  report.add(key + ".min", f.minCoeff(), source);
  report.add(key + ".max", f.maxCoeff(), source);
  report.add(key + ".mean", f.mean(), source);
}

void add_contraction_constants(Report& report, const DerivedCoefficients& c) {
  try {
    report.add("coeffs.lambda0", lambda0(c), "coeffs.lambda0(cell samples)");
  } catch (const InapplicableError& e) {
    report.add_text("coeffs.lambda0", "inapplicable", std::string("coeffs.lambda0: ") + e.what());
  }
  try {
    report.add("coeffs.c_taz", c_taz_bound(c), "coeffs.c_taz_bound(cell samples)");
  } catch (const InapplicableError& e) {
    report.add_text("coeffs.c_taz", "inapplicable", std::string("coeffs.c_taz_bound: ") + e.what());
  }
}

}  // namespace

fs::path output_root() {
  if (const char* env = std::getenv("SIRS_OUTPUT_ROOT"); env && *env) return fs::path(env);
  return fs::path("sirs_output");
}

fs::path run_directory(const fs::path& root, std::string_view command, const Scenario& scenario) {
  return root / std::string(command) /
         fmt::format("{}-{}", scenario.name, scenario_hash(scenario).substr(0, 8));
}

// ---------------------------------------------------------------------------

void eigen_stage(const Scenario& scenario, const std::vector<double>& rho_values, Report& report,
                 const fs::path* artifacts, std::ostream* log) {
  StageTimer timer(report, "eigen");
  const DerivedCoefficients c = derive(scenario);
  const EigenSettings settings = eigen_settings(c.tol);
  report.add("coeffs.M", c.M, "coeffs.derive: cell average of S0");
  add_field_summary(report, "coeffs.gamma_star", c.gamma_star, "coeffs.derive: alpha M - mu");

  const EigenResult eig = principal_eigenpair(c.grid, c.gamma_star, c.d, settings);
  const std::string src = eigen_source("principal_eigenpair", c);
  report.add("eigen.lambda1", eig.eigenvalue, src);
  report.add("eigen.residual", eig.residual, src);
  report.add("eigen.iterations", eig.iterations, src);
  report.add("eigen.rayleigh_quotient",
             rayleigh_quotient(c.grid, c.gamma_star, c.d, eig.eigenfunction),
             "principal_eigen.rayleigh_quotient(eigenfunction)");
  if (c.homogeneous) {
    report.add("eigen.closed_form", -c.gamma_star(0), "constant coefficients: -gamma*");
  }
  line(log, fmt::format("lambda1 = {}  (residual {:.3g}, {} iterations)",
                        format_number(eig.eigenvalue), eig.residual, eig.iterations));

  Table k_table({"rho", "k"});
  const Vec e = Vec::Unit(c.grid.dimension, 0);
  const Field* warm = &eig.eigenfunction;
  EigenResult last;
  for (std::size_t i = 0; i < rho_values.size(); ++i) {
    const Vec rho = rho_values[i] * e;
    last = drifted_principal_eigenvalue(c.grid, c.gamma_star, c.d, rho, settings, warm);
    warm = &last.eigenfunction;
    const std::string src_k = eigen_source("drifted_principal_eigenvalue", c) +
                              fmt::format(" along {}", vector_text(e));
    report.add(fmt::format("eigen.k.{}.rho", i), rho_values[i], "command line");
    report.add(fmt::format("eigen.k.{}.value", i), last.eigenvalue, src_k);
    k_table.row({format_number(rho_values[i]), format_number(last.eigenvalue)});
    line(log, fmt::format("k({}) = {}", format_number(rho_values[i]),
                          format_number(last.eigenvalue)));
  }
  if (artifacts) {
    std::ofstream out(*artifacts / "eigenfunction.tsv");
    write_snapshot(out, c.grid, {{"phi", &eig.eigenfunction}, {"gamma_star", &c.gamma_star}});
    report.add_artifact("eigenfunction", *artifacts / "eigenfunction.tsv");
    if (!rho_values.empty()) {
      k_table.write(*artifacts / "k_rho.tsv");
      report.add_artifact("k_rho", *artifacts / "k_rho.tsv");
    }
  }
}

// ---------------------------------------------------------------------------

void speed_stage(const Scenario& scenario, Report& report, const fs::path* artifacts,
                 std::ostream* log) {
  StageTimer timer(report, "speed");
  const DerivedCoefficients c = derive(scenario);
  const StationaryOperators ops(c);
  const Barriers b = compute_barriers(ops);
  const SpeedSettings settings = speed_settings(c.tol);
  report.add("speed.lambda1", b.lambda1, eigen_source("principal_eigenpair", c));
  report.add("speed.lambda1_reduced", b.lambda1_reduced,
             eigen_source("principal_eigenpair", c) + " of gamma* - alpha R_bar");
  report.add("speed.assumption1", b.assumption1_holds, "stationary.compute_barriers");
  report.add("speed.assumption2", b.assumption2_holds, "stationary.compute_barriers");
  add_contraction_constants(report, c);
  if (!b.assumption1_holds) {
    const std::string msg = fmt::format(
        "assumption1 fails: λ₁ = {:.6g} ≥ 0, no spreading (disease-free regime)", b.lambda1);
    report.add_text("speed.status", msg, "stationary.compute_barriers");
    line(log, msg);
    return;
  }
  if (c.homogeneous) {
    const double g = c.gamma_star(0);
    const double ratio = c.mu(0) / c.lambda(0);
    report.add("speed.closed_form.upper", homogeneous_speed(c.d, g),
               "speeds.homogeneous_speed(d, gamma*)");
    if (ratio < 1.0) {
      report.add("speed.closed_form.lower", homogeneous_speed(c.d, g * (1.0 - ratio)),
                 "speeds.homogeneous_speed(d, gamma* (1 - mu/lambda))");
    }
  }
  const Field reduced = c.gamma_star - c.alpha.cwiseProduct(b.R_bar);
  const std::string scan_src = fmt::format(
      "speeds.fg_speed(resolution={}, r=[{}, {}], scan={}, rel_tol={})", c.grid.points,
      format_number(settings.r_min), format_number(settings.r_max), settings.scan_points,
      format_number(settings.relative_tolerance));
  const auto dirs = speed_directions(c.grid.dimension);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const std::string key = fmt::format("speed.dir{}", i);
    report.add_text(key + ".direction", vector_text(dirs[i]), "speed directions");
    const SpeedResult up = fg_speed(c.grid, c.gamma_star, c.d, dirs[i], settings);
    report.add(key + ".upper", up.speed, scan_src + " on gamma*");
    report.add(key + ".upper_rho", up.rho.dot(dirs[i]), scan_src + " on gamma*");
    std::string lower_text = "unavailable";
    if (b.assumption2_holds) {
      const SpeedResult lo = fg_speed(c.grid, reduced, c.d, dirs[i], settings);
      report.add(key + ".lower", lo.speed, scan_src + " on gamma* - alpha R_bar");
      report.add(key + ".lower_rho", lo.rho.dot(dirs[i]), scan_src + " on gamma* - alpha R_bar");
      lower_text = format_number(lo.speed);
      if (artifacts) {
        write_scan(*artifacts / fmt::format("scan_dir{}_lower.tsv", i), lo);
        report.add_artifact(key + ".scan_lower", *artifacts / fmt::format("scan_dir{}_lower.tsv", i));
      }
    } else {
      report.add_text(key + ".lower", "unavailable",
                      "stationary.compute_barriers: assumption2 fails");
    }
    if (artifacts) {
      write_scan(*artifacts / fmt::format("scan_dir{}_upper.tsv", i), up);
      report.add_artifact(key + ".scan_upper", *artifacts / fmt::format("scan_dir{}_upper.tsv", i));
    }
    line(log, fmt::format("direction {}: w_lower = {}  w_upper = {}", vector_text(dirs[i]),
                          lower_text, format_number(up.speed)));
  }
}

// ---------------------------------------------------------------------------

void stationary_stage(const Scenario& scenario, Report& report, const fs::path* artifacts,
                      std::ostream* log) {
  StageTimer timer(report, "stationary");
  const DerivedCoefficients c = derive(scenario);
  const StationaryOperators ops(c);
  const Barriers b = compute_barriers(ops);
  const std::string barrier_src = fmt::format(
      "stationary.compute_barriers(resolution={}, stationary_tol={})", c.grid.points,
      format_number(c.tol.stationary));
  report.add("stationary.lambda1", b.lambda1, eigen_source("principal_eigenpair", c));
  report.add("stationary.assumption1", b.assumption1_holds, barrier_src);
  report.add("stationary.assumption2", b.assumption2_holds, barrier_src);
  add_contraction_constants(report, c);

  if (!b.assumption1_holds) {
    const std::string msg =
        fmt::format("assumption1 fails: λ₁ = {:.6g} ≥ 0, disease-free regime", b.lambda1);
    report.add_text("stationary.status", msg, barrier_src);
    report.add("stationary.disease_free.S", c.M, "coeffs.derive: cell average of S0");
    line(log, msg);
    return;
  }
  add_field_summary(report, "stationary.I_bar", b.I_bar, barrier_src);
  add_field_summary(report, "stationary.R_bar", b.R_bar, barrier_src);
  add_field_summary(report, "stationary.I_under", b.I_under, barrier_src);

  const StationaryState st = fixed_point(ops, b);
  const std::string fp_src = fmt::format(
      "stationary.fixed_point(resolution={}, tol={}, max_iterations={})", c.grid.points,
      format_number(c.tol.fixed_point), c.tol.fixed_point_max_iterations);
  report.add_text("stationary.status", "endemic", fp_src);
  report.add("stationary.iterations", st.iterations, fp_src);
  report.add("stationary.contraction_estimate", st.contraction_estimate, fp_src);
  report.add("stationary.residual_S", st.residual_S, fp_src);
  report.add("stationary.residual_I", st.residual_I, fp_src);
  report.add("stationary.residual_R", st.residual_R, fp_src);
  report.add("stationary.lambda_above_lambda0", st.lambda_above_lambda0, fp_src);
  report.add("stationary.barrier_contact", st.barrier_contact, fp_src);
  for (std::size_t i = 0; i < st.warnings.size(); ++i) {
    report.add_text(fmt::format("stationary.warning.{}", i), st.warnings[i], fp_src);
  }
  add_field_summary(report, "stationary.S_star", st.S_star, fp_src);
  add_field_summary(report, "stationary.I_star", st.I_star, fp_src);
  add_field_summary(report, "stationary.R_star", st.R_star, fp_src);
  if (c.homogeneous) {
    const double a = c.alpha(0), m = c.mu(0), l = c.lambda(0);
    const double i_star = (a * c.M - m) / (a * (1.0 + m / l));
    report.add("stationary.closed_form.S", m / a, "constant coefficients: mu/alpha");
    report.add("stationary.closed_form.I", i_star,
               "constant coefficients: (alpha M - mu)/(alpha (1 + mu/lambda))");
    report.add("stationary.closed_form.R", m / l * i_star, "constant coefficients: mu/lambda I*");
  }
  line(log, fmt::format("fixed point after {} iterations, contraction estimate {:.4g}",
                        st.iterations, st.contraction_estimate));
  line(log, fmt::format("S* in [{:.8g}, {:.8g}], I* in [{:.8g}, {:.8g}], R* in [{:.8g}, {:.8g}]",
                        st.S_star.minCoeff(), st.S_star.maxCoeff(), st.I_star.minCoeff(),
                        st.I_star.maxCoeff(), st.R_star.minCoeff(), st.R_star.maxCoeff()));
  line(log, fmt::format("residuals S {:.3g}  I {:.3g}  R {:.3g}", st.residual_S, st.residual_I,
                        st.residual_R));
  for (const auto& w : st.warnings) line(log, "warning: " + w);

  if (artifacts) {
    std::ofstream out(*artifacts / "stationary.tsv");
    write_snapshot(out, c.grid,
                   {{"I_bar", &b.I_bar}, {"R_bar", &b.R_bar}, {"I_under", &b.I_under},
                    {"S_star", &st.S_star}, {"I_star", &st.I_star}, {"R_star", &st.R_star}});
    report.add_artifact("stationary", *artifacts / "stationary.tsv");
    Table inc({"iteration", "l2_increment"});
    for (std::size_t i = 0; i < st.increments.size(); ++i) {
      inc.row({fmt::format("{}", i + 1), format_number(st.increments[i])});
    }
    inc.write(*artifacts / "increments.tsv");
    report.add_artifact("increments", *artifacts / "increments.tsv");
  }
}

// ---------------------------------------------------------------------------

void simulate_stage(const Scenario& scenario, Report& report, const fs::path* artifacts,
                    std::ostream* log) {
  StageTimer timer(report, "simulate");
  SimulationOptions options;
  options.keep_snapshots = false;
  std::optional<Grid> grid;
  int snapshot_index = 0;
  Table snapshot_index_table({"index", "t", "file"});
  if (artifacts) {
    grid = make_domain_grid(scenario.dimension, scenario.half_width, scenario.step,
                            scenario.boundary);
    options.on_snapshot = [&](const Snapshot& s) {
      const std::string name = fmt::format("snapshot_{:04d}.tsv", snapshot_index++);
      const fs::path file = *artifacts / "snapshots" / name;
      fs::create_directories(file.parent_path());
      std::ofstream out(file);
      write_snapshot(out, *grid, {{"S", &s.S}, {"I", &s.I}, {"R", &s.R}});
      snapshot_index_table.row({fmt::format("{}", snapshot_index - 1), format_number(s.t), name});
    };
  }
  const SimulationResult res = simulate(scenario, options);
  const Diagnostics& d = res.diagnostics;
  const std::string src = fmt::format(
      "evolution.simulate(half_width={}, step={}, dt={}, final={})",
      format_number(scenario.half_width), format_number(scenario.step), format_number(d.dt),
      format_number(scenario.time.final_time));
  report.add_text("simulate.classification", d.classification, src);
  report.add("simulate.spreading_expected", d.spreading_expected,
             "stationary.compute_barriers: lambda1 < 0");
  report.add("simulate.lambda1", d.lambda1, "stationary.compute_barriers");
  report.add("simulate.dt", d.dt, src);
  report.add("simulate.steps", d.steps, src);
  report.add("simulate.sup_I_final", d.sup_I_final, src);
  report.add("simulate.sup_S_deviation_final", d.sup_S_deviation_final, src);
  report.add("simulate.min_value", d.min_value, src);
  report.add("simulate.mass_drift", d.mass_drift, src);
  report.add("simulate.front_threshold", res.trace.threshold, src);
  bool monotone = true;
  for (std::size_t i = 1; i < d.homogenization.size(); ++i) {
    monotone = monotone && d.homogenization[i] <= d.homogenization[i - 1] + 1e-12;
  }
  if (!d.homogenization.empty()) {
    report.add("simulate.homogenization_final", d.homogenization.back(), src);
  }
  report.add("simulate.homogenization_monotone", monotone, src);
  static constexpr const char* names[3] = {"S", "I", "R"};
  for (int k = 0; k < 3; ++k) {
    report.add(fmt::format("simulate.centre.{}", names[k]), d.centre_values[k], src);
    if (d.centre_reference) {
      report.add(fmt::format("simulate.centre_reference.{}", names[k]), (*d.centre_reference)[k],
                 "stationary.fixed_point on the commensurate cell grid");
    }
  }
  line(log, fmt::format("classification: {}  (lambda1 = {:.6g}, sup I(T) = {:.4g})",
                        d.classification, d.lambda1, d.sup_I_final));

  const int dim = scenario.dimension;
  std::optional<Barriers> barriers;
  std::optional<DerivedCoefficients> coeffs;
  if (d.spreading_expected) {
    coeffs = derive(scenario);
    barriers = compute_barriers(*coeffs);
  }
  for (std::size_t i = 0; i < res.trace.directions.size(); ++i) {
    const Vec& e = res.trace.directions[i];
    const std::string key = fmt::format("simulate.front.dir{}", i);
    report.add_text(key + ".direction", vector_text(e), "evolution.default_directions");
    const auto& fit = res.trace.fits[i];
    std::string measured = "none";
    if (fit) {
      const std::string fit_src = fmt::format("evolution.measure_speed(window_start={}, samples={})",
                                              format_number(fit->window_start), fit->samples);
      report.add(key + ".speed", fit->slope, fit_src);
      report.add(key + ".rms_residual", fit->rms_residual, fit_src);
      measured = fmt::format("{:.5g}", fit->slope);
    } else {
      report.add_text(key + ".speed", "unavailable", "evolution.measure_speed: too few samples");
    }
    std::string sandwich;
    if (barriers && barriers->assumption2_holds && fit) {
      const SpeedPair pair = speed_pair(*coeffs, *barriers, e, speed_settings(coeffs->tol));
      report.add(key + ".predicted_lower", pair.lower.speed, "speeds.speed_pair");
      report.add(key + ".predicted_upper", pair.upper.speed, "speeds.speed_pair");
      sandwich = fmt::format("  predicted [{:.5g}, {:.5g}]", pair.lower.speed, pair.upper.speed);
    }
    line(log, fmt::format("front along {}: measured speed {}{}", vector_text(e), measured,
                          sandwich));
  }
  (void)dim;

  if (artifacts) {
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < res.trace.directions.size(); ++i) {
      cols.push_back(fmt::format("r_dir{}", i));
    }
    Table trace(cols);
    for (std::size_t n = 0; n < res.trace.times.size(); ++n) {
      std::vector<double> row{res.trace.times[n]};
      for (const auto& p : res.trace.positions) row.push_back(p[n]);
      trace.row_numbers(row);
    }
    trace.write(*artifacts / "front_trace.tsv");
    report.add_artifact("front_trace", *artifacts / "front_trace.tsv");
    snapshot_index_table.write(*artifacts / "snapshots" / "index.tsv");
    report.add_artifact("snapshots", *artifacts / "snapshots" / "index.tsv");
    Table hom({"snapshot", "sup_N_minus_mean"});
    for (std::size_t i = 0; i < d.homogenization.size(); ++i) {
      hom.row({fmt::format("{}", i), format_number(d.homogenization[i])});
    }
    hom.write(*artifacts / "homogenization.tsv");
    report.add_artifact("homogenization", *artifacts / "homogenization.tsv");
  }
}

// ---------------------------------------------------------------------------

ThresholdResult threshold_bisection(const Scenario& scenario, std::string_view parameter,
                                    double lo, double hi, double tolerance) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError(fmt::format("threshold range [{}, {}] is empty", lo, hi));
  }
  if (!(tolerance > 0.0)) throw ValidationError("threshold tolerance must be positive");
  auto lambda_at = [&](double v) {
    const DerivedCoefficients c = derive(with_parameter(scenario, parameter, v));
    return principal_eigenpair(c.grid, c.gamma_star, c.d, eigen_settings(c.tol)).eigenvalue;
  };
  ThresholdResult out;
  out.parameter = std::string(parameter);
  out.lo = lo;
  out.hi = hi;
  out.lambda_lo = lambda_at(lo);
  out.lambda_hi = lambda_at(hi);
  out.steps.push_back({lo, out.lambda_lo});
  out.steps.push_back({hi, out.lambda_hi});
  out.sign_change = (out.lambda_lo < 0.0) != (out.lambda_hi < 0.0);
  if (!out.sign_change) return out;
  double a = lo, b = hi;
  const bool negative_at_a = out.lambda_lo < 0.0;
  while (b - a > tolerance) {
    const double m = 0.5 * (a + b);
    const double lm = lambda_at(m);
    out.steps.push_back({m, lm});
    if ((lm < 0.0) == negative_at_a) {
      a = m;
    } else {
      b = m;
    }
  }
  out.critical = 0.5 * (a + b);
  out.bracket_width = b - a;
  return out;
}

void threshold_stage(const Scenario& scenario, std::string_view parameter, double lo, double hi,
                     double tolerance, Report& report, const fs::path* artifacts,
                     std::ostream* log) {
  StageTimer timer(report, "threshold");
  const ThresholdResult r = threshold_bisection(scenario, parameter, lo, hi, tolerance);
  report.add_text("threshold.parameter", r.parameter, "command line");
  report.add("threshold.lo", r.lo, "command line");
  report.add("threshold.hi", r.hi, "command line");
  report.add("threshold.tolerance", tolerance, "command line");
  const std::string src = "principal_eigen.principal_eigenpair of -d Lap - gamma* per bisection point";
  report.add("threshold.lambda1_lo", r.lambda_lo, src);
  report.add("threshold.lambda1_hi", r.lambda_hi, src);
  report.add("threshold.sign_change", r.sign_change, src);
  if (r.sign_change) {
    report.add("threshold.critical", r.critical, "bisection midpoint");
    report.add("threshold.bracket_width", r.bracket_width, "bisection");
    line(log, fmt::format("critical {} = {:.6f}  (bracket width {:.2g}, {} evaluations)",
                          r.parameter, r.critical, r.bracket_width, r.steps.size()));
  } else {
    line(log, fmt::format("no sign change of lambda1 on {} in [{}, {}]: lambda1 = {:.6g} .. {:.6g}",
                          r.parameter, format_number(lo), format_number(hi), r.lambda_lo,
                          r.lambda_hi));
  }
  if (artifacts) {
    Table t({r.parameter, "lambda1"});
    for (const auto& s : r.steps) t.row_numbers({s.value, s.lambda1});
    t.write(*artifacts / "bisection.tsv");
    report.add_artifact("bisection", *artifacts / "bisection.tsv");
  }
}

// ---------------------------------------------------------------------------

namespace {

struct CommonOptions {
  std::string output;
  bool quiet = false;
};

fs::path resolve_root(const CommonOptions& o) {
  return o.output.empty() ? output_root() : fs::path(o.output);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return validation_failure;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return solver_failure;
  } catch (const InapplicableError& e) {
    err << "solver failure: " << e.what() << '\n';
    return solver_failure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return solver_failure;
  }
}

// Runs one scenario command and writes its report; shared by the subcommands and by
// `report --verify`.
Report execute(const std::string& command, const Scenario& s, const std::vector<double>& rho,
               const std::string& parameter, double lo, double hi, double tol,
               const fs::path& dir, std::ostream* log) {
  fs::create_directories(dir);
  Report report(command, s);
  if (command == "eigen") {
    eigen_stage(s, rho, report, &dir, log);
  } else if (command == "speed") {
    speed_stage(s, report, &dir, log);
  } else if (command == "stationary") {
    stationary_stage(s, report, &dir, log);
  } else if (command == "simulate") {
    simulate_stage(s, report, &dir, log);
  } else if (command == "threshold") {
    threshold_stage(s, parameter, lo, hi, tol, report, &dir, log);
  } else {
    throw ValidationError(fmt::format("unknown command '{}'", command));
  }
  report.write(dir);
  return report;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int verify_report(const fs::path& file, std::ostream& out) {
  const LoadedReport loaded = load_report(file);
  const std::string original = read_file(file);
  std::vector<double> rho;
  std::string parameter;
  double lo = 0.0, hi = 0.0, tol = 1e-4;
  const YAML::Node results = loaded.root["results"];
  if (results && results.IsMap()) {
    for (int i = 0; results[fmt::format("eigen.k.{}.rho", i)]; ++i) {
      rho.push_back(results[fmt::format("eigen.k.{}.rho", i)]["value"].as<double>());
    }
    if (results["threshold.parameter"]) {
      parameter = results["threshold.parameter"]["value"].as<std::string>();
      lo = results["threshold.lo"]["value"].as<double>();
      hi = results["threshold.hi"]["value"].as<double>();
      tol = results["threshold.tolerance"]["value"].as<double>();
    }
  }
  const fs::path scratch = file.parent_path() / "verify";
  const Report again =
      execute(loaded.command, loaded.scenario, rho, parameter, lo, hi, tol, scratch, nullptr);
  if (again.text() != original) {
    out << "report differs from a fresh run (see " << (scratch / "report.yaml").string() << ")\n";
    return solver_failure;
  }
  fs::remove_all(scratch);
  out << "report verified: a fresh run reproduces it byte for byte\n";
  return success;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for the periodic SIRS reaction-diffusion system", "sirslab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SIRSLAB_VERSION);
  CommonOptions common;
  app.add_option("-o,--output", common.output,
                 "Output root (default: $SIRS_OUTPUT_ROOT or ./sirs_output)");
  app.add_flag("-q,--quiet", common.quiet, "Only print errors");

  std::string scenario_file;
  std::vector<double> rho;
  auto* eigen = app.add_subcommand("eigen", "Principal eigenvalue of -d Lap - gamma*");
  eigen->add_option("scenario", scenario_file, "Scenario file")->required();
  eigen->add_option("--rho", rho, "Drift magnitudes along e1 at which to report k(rho)");

  auto* speed = app.add_subcommand("speed", "Spreading speed bounds per direction");
  speed->add_option("scenario", scenario_file, "Scenario file")->required();

  auto* stationary = app.add_subcommand("stationary", "Barriers and endemic stationary state");
  stationary->add_option("scenario", scenario_file, "Scenario file")->required();

  auto* sim = app.add_subcommand("simulate", "Time integration with front tracking");
  sim->add_option("scenario", scenario_file, "Scenario file")->required();

  std::string parameter;
  std::vector<double> range;
  double tolerance = 1e-4;
  auto* threshold = app.add_subcommand("threshold", "Critical parameter value where lambda1 = 0");
  threshold->add_option("scenario", scenario_file, "Scenario file")->required();
  threshold->add_option("-p,--parameter", parameter, "Dotted parameter path, e.g. S0.value")
      ->required();
  threshold->add_option("-r,--range", range, "Lower and upper end of the axis")
      ->required()
      ->expected(2);
  threshold->add_option("--tolerance", tolerance, "Bracket width at which bisection stops");

  std::string sweep_file;
  int workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Cross-product parameter sweep (resumable)");
  sweep->add_option("sweep", sweep_file, "Sweep file")->required();
  sweep->add_option("-j,--workers", workers, "Worker threads (default: hardware concurrency)");

  std::string report_file;
  bool verify = false;
  auto* report = app.add_subcommand("report", "Check a report and optionally reproduce it");
  report->add_option("report", report_file, "report.yaml")->required();
  report->add_flag("--verify", verify, "Rerun the recorded command and compare byte for byte");

  std::vector<const char*> argv{"sirslab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), const_cast<char**>(argv.data()));
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return validation_failure;
  }
  std::ostream* log = common.quiet ? nullptr : &out;

  auto scenario_command = [&](const std::string& command) {
    return guarded(err, [&] {
      const Scenario s = load_scenario(scenario_file);
      fs::path dir = run_directory(resolve_root(common), command, s);
      if (command == "threshold") dir += "-" + parameter;
      double lo = range.size() == 2 ? range[0] : 0.0;
      double hi = range.size() == 2 ? range[1] : 0.0;
      execute(command, s, rho, parameter, lo, hi, tolerance, dir, log);
      if (log) *log << "report: " << (dir / "report.yaml").string() << '\n';
      return static_cast<int>(success);
    });
  };

  if (*eigen) return scenario_command("eigen");
  if (*speed) return scenario_command("speed");
  if (*stationary) return scenario_command("stationary");
  if (*sim) return scenario_command("simulate");
  if (*threshold) return scenario_command("threshold");
  if (*sweep) {
    return guarded(err, [&] {
      const SweepSpec spec = load_sweep(sweep_file);
      const fs::path dir = resolve_root(common) / "sweep" /
                           fmt::format("{}-{}", fs::path(sweep_file).stem().string(),
                                       sweep_hash(spec).substr(0, 8));
      const SweepOutcome outcome = run_sweep(spec, dir, workers);
      if (log) {
        *log << outcome.table.text();
        *log << fmt::format("{} cells: {} computed, {} reused, {} failed\n", outcome.cells,
                            outcome.computed, outcome.reused, outcome.failed);
        *log << "table: " << (dir / "table.tsv").string() << '\n';
      }
      return static_cast<int>(success);
    });
  }
  if (*report) {
    return guarded(err, [&] {
      if (verify) return verify_report(report_file, out);
      const LoadedReport loaded = load_report(report_file);
      out << fmt::format("command: {}\nscenario: {} (hash {})\n", loaded.command,
                         loaded.scenario.name, loaded.hash);
      const YAML::Node results = loaded.root["results"];
      if (results && results.IsMap()) {
        for (const auto& kv : results) {
          out << fmt::format("  {} = {}\n", kv.first.as<std::string>(),
                             kv.second["value"].as<std::string>());
        }
      }
      return static_cast<int>(success);
    });
  }
  return validation_failure;
}

}  // namespace sirs::app

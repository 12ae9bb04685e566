#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sirs/grid.hpp"

namespace sirs {

// ---------------------------------------------------------------------------
// Periodic coefficients on the unit cell. Period is fixed to 1 on every axis.

struct Constant {
  double value = 0.0;
  bool operator==(const Constant&) const = default;
};

/// amplitude * cos(2 pi frequency . x + phase)
struct CosineTerm {
  double amplitude = 0.0;
  std::vector<int> frequency;
  double phase = 0.0;
  bool operator==(const CosineTerm&) const = default;
};

struct CosineSeries {
  double mean = 0.0;
  std::vector<CosineTerm> terms;
  bool operator==(const CosineSeries&) const = default;
};

/// Step function of one coordinate: values[i] on [breakpoints[i-1], breakpoints[i]),
/// with implicit breakpoints 0 and 1. Breakpoints strictly increasing inside (0, 1).
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values;
  int axis = 0;
  bool operator==(const PiecewiseConstant&) const = default;
};

using CoefficientSpec = std::variant<Constant, CosineSeries, PiecewiseConstant>;

double evaluate(const CoefficientSpec& spec, const Vec& x);
bool is_constant(const CoefficientSpec& spec);

/// Point samples of `spec` on `grid`. When `positive_name` is given every sample must
/// be strictly positive; a violation throws ValidationError naming the coefficient.
Field sample_coefficient(const CoefficientSpec& spec, const Grid& grid,
                         std::optional<std::string_view> positive_name = std::nullopt);

// ---------------------------------------------------------------------------
// Initial infectious density: height * cos^2(pi |x - c| / (2 radius)) on |x - c| < radius.

struct Bump {
  Vec center;
  double radius = 1.0;
  double height = 0.1;

  double evaluate(const Vec& x) const;
};

struct Tolerances {
  double eigen = 1e-9;           // eigenvalue increment
  double eigen_residual = 1e-7;  // sup |(L - k) phi| with sup phi = 1
  int eigen_max_iterations = 10000;
  double speed = 1e-5;           // relative, golden-section on r
  double stationary = 1e-11;     // sup |u(t+1) - u(t)| in the T relaxation
  double stationary_max_time = 5e4;
  double fixed_point = 1e-8;     // cell L2 increment
  int fixed_point_max_iterations = 200;
  double barrier_slack = 1e-7;
  double extinction = 1e-4;      // sup I below which a run is classified extinct

  bool operator==(const Tolerances&) const = default;
};

struct TimeSettings {
  std::optional<double> dt;  // empty: derived from the reaction rates
  double final_time = 100.0;
  double snapshot_interval = 10.0;
  double trace_interval = 0.5;

  bool operator==(const TimeSettings&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  int dimension = 1;
  double d = 1.0;
  CoefficientSpec alpha = Constant{1.0};
  CoefficientSpec mu = Constant{1.0};
  CoefficientSpec lambda = Constant{1.0};
  CoefficientSpec S0 = Constant{1.0};
  Bump I0;
  int cell_resolution = 128;
  double half_width = 50.0;
  double step = 1.0 / 32.0;
  Boundary boundary = Boundary::periodic;
  TimeSettings time;
  Tolerances tol;
  std::optional<double> front_threshold;
};

bool operator==(const Scenario& a, const Scenario& b);

/// Throws ValidationError on the first violated invariant.
void validate(const Scenario& scenario);

// ---------------------------------------------------------------------------

/// Sampled coefficients on a periodicity cell plus the quantities derived from them.
struct DerivedCoefficients {
  Grid grid;
  double d = 1.0;
  Tolerances tol;
  Field alpha, mu, lambda, s0;
  Field gamma_star;  // alpha * M - mu
  double M = 0.0;    // cell average of S0
  bool homogeneous = false;
  std::optional<double> lambda0;
  std::optional<double> c_taz;
};

/// Samples the scenario on its own cell grid (or one of `resolution` when given).
DerivedCoefficients derive(const Scenario& scenario, std::optional<int> resolution = std::nullopt);

/// Same as derive(); named after the quantity it is usually called for.
inline DerivedCoefficients gamma_star(const Scenario& scenario) { return derive(scenario); }

/// (max mu * max(g/a) / min(g/a)) * (max a / min a + 1), extrema over the samples.
/// Throws InapplicableError when min gamma* <= 0.
double lambda0(const DerivedCoefficients& c);

/// Lipschitz constant of T o A o Z in the cell L2 norm. mu/lambda for homogeneous
/// coefficients; otherwise the explicit heterogeneous bound, which needs
/// min(g/a) > max(mu/lambda) max(g/a) and throws InapplicableError if not.
double c_taz_bound(const DerivedCoefficients& c);

}  // namespace sirs

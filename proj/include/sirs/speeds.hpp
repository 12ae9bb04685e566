#pragma once

#include <vector>

#include "sirs/coeffs.hpp"
#include "sirs/principal_eigen.hpp"
#include "sirs/stationary.hpp"

namespace sirs {

struct SpeedSettings {
  double r_min = 1e-2;
  double r_max = 1e2;
  int scan_points = 40;
  double relative_tolerance = 1e-5;
  bool full_minimization = false;  // 2D only: Nelder-Mead over rho with rho.e > 0
  EigenSettings eigen;
};

struct ScanRow {
  double r = 0.0;
  double k = 0.0;      // k(r e); NaN when skipped
  double value = 0.0;  // -k/r, or the lower bound (d r^2 + min gamma)/r when skipped
  bool evaluated = false;
};

struct SpeedResult {
  Vec direction;
  double speed = 0.0;
  Vec rho;  // minimiser
  double k_at_rho = 0.0;
  double lambda1 = 0.0;
  int brackets = 0;  // local minima refined
  int evaluations = 0;
  std::vector<ScanRow> scan;
};

/// 2 sqrt(d gamma_bar); throws ValidationError unless both are positive.
double homogeneous_speed(double d, double gamma_bar);

/// w(e) = inf over rho with rho.e > 0 of -k(rho)/(rho.e). The default searches the ray
/// rho = r e; `full_minimization` continues with a polytope search over all rho in 2D.
SpeedResult fg_speed(const Grid& grid, const Field& gamma, double d, const Vec& direction,
                     const SpeedSettings& settings = {});

struct SpeedPair {
  SpeedResult lower;  // from gamma* - alpha R_bar
  SpeedResult upper;  // from gamma*
};

SpeedPair speed_pair(const DerivedCoefficients& coeffs, const Barriers& barriers,
                     const Vec& direction, const SpeedSettings& settings = {});
SpeedPair speed_pair(const Scenario& scenario, const Vec& direction);

/// Settings seeded from a scenario's tolerance block.
SpeedSettings speed_settings(const Tolerances& tol);

}  // namespace sirs

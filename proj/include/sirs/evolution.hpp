#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sirs/coeffs.hpp"
#include "sirs/errors.hpp"
#include "sirs/stationary.hpp"
#include "sirs/tridiagonal.hpp"

namespace sirs {

/// (I - c Lap)^{-1} on a domain grid. Exact tridiagonal solve in 1D; in 2D one
/// tridiagonal sweep per axis (first-order splitting). Both conserve the discrete sum on
/// periodic and zero-flux grids.
class ImplicitDiffusion {
 public:
  ImplicitDiffusion() = default;
  ImplicitDiffusion(const Grid& grid, double coefficient);
  void solve_in_place(Field& u) const;

 private:
  Grid grid_;
  TridiagonalSolver<double> line_;
};

struct EvolutionState {
  double t = 0.0;
  Field S, I, R;
  long step = 0;
};

class EvolutionError : public SolverError {
 public:
  EvolutionError(const std::string& what, EvolutionState state)
      : SolverError(what), state(std::move(state)) {}
  EvolutionState state;
};

class DomainTooSmall : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Largest time step keeping the explicit reaction update non-negative:
/// dt * max(sup alpha N0, sup mu, sup lambda) <= 1.
double positivity_time_step(const Scenario& scenario);

/// Default step: min(0.2 / (1 + sup gamma* + sup alpha N0), 0.5 * positivity bound).
double default_time_step(const Scenario& scenario);

// IMEX integrator for the full three-component system: explicit mass-action reaction, then
// implicit diffusion per component with one shared diffusivity.
class SirsIntegrator {
 public:
  explicit SirsIntegrator(const Scenario& scenario, std::optional<double> dt = std::nullopt);

  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }
  EvolutionState initial_state() const;
  /// Advances one step; throws EvolutionError on NaN or negativity below -1e-12.
  void step(EvolutionState& state) const;

 private:
  Grid grid_;
  double dt_;
  Field alpha_, mu_, lambda_;
  Field s0_, i0_;
  ImplicitDiffusion diffusion_;
};

EvolutionState step(const EvolutionState& state, const Scenario& scenario, double dt);

// ---------------------------------------------------------------------------
// Front metrology.

/// Largest r on the ray from `origin` along unit `direction` such that I at the grid point
/// nearest origin + r e is >= threshold; -infinity if there is none.
double front_position(const Grid& grid, const Field& I, double threshold, const Vec& direction,
                      const Vec& origin);
double front_position(const Grid& grid, const Field& I, double threshold, const Vec& direction);

/// Largest admissible r on the ray before it leaves the box.
double ray_extent(const Grid& grid, const Vec& direction, const Vec& origin);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double window_start = 0.0;
  int samples = 0;
};

/// Least-squares line through the last `window_fraction` of the finite samples.
/// Throws ValidationError with fewer than 10 samples in the window.
LinearFit measure_speed(const std::vector<double>& times, const std::vector<double>& positions,
                        double window_fraction = 0.4);

struct FrontTrace {
  double threshold = 0.0;
  std::vector<Vec> directions;
  std::vector<double> times;
  std::vector<std::vector<double>> positions;  // [direction][sample]
  std::vector<std::optional<LinearFit>> fits;  // empty when too few finite samples
};

// ---------------------------------------------------------------------------

struct Snapshot {
  double t = 0.0;
  Field S, I, R;
};

struct Diagnostics {
  std::string classification;  // "spreading" or "extinct"
  bool spreading_expected = false;
  double lambda1 = 0.0;
  double sup_I_final = 0.0;
  double sup_S_deviation_final = 0.0;  // sup |S - M|
  double min_value = 0.0;              // over all steps and components
  double mass_drift = 0.0;             // max relative change of sum N h^n
  std::vector<double> homogenization;  // sup |N - mean N| at each snapshot
  std::array<double, 3> centre_values{};       // S, I, R at the grid point nearest I0's centre
  std::optional<std::array<double, 3>> centre_reference;  // S*, I*, R* at that point
  double dt = 0.0;
  long steps = 0;
};

struct SimulationOptions {
  std::vector<Vec> directions;  // default: +-axes, plus diagonals in 2D
  bool keep_snapshots = true;
  std::function<void(const Snapshot&)> on_snapshot;
};

struct SimulationResult {
  Grid grid;
  std::vector<Snapshot> snapshots;
  FrontTrace trace;
  Diagnostics diagnostics;
  std::optional<StationaryState> reference;
};

/// Integrates to the scenario's final time. Throws DomainTooSmall when a tracked front
/// comes within 5 grid cells of the box edge.
SimulationResult simulate(const Scenario& scenario, const SimulationOptions& options = {});

std::vector<Vec> default_directions(int dimension);

// ---------------------------------------------------------------------------
// Reduced two-component system for (I, R) driven by N = S + I + R, and the scalar
// logistic comparison run  u_t = d_I Lap u + gamma(t,x) u - alpha u^2  with the same
// gamma(t,x) = alpha N(t,x) - mu and initial datum.

struct ReducedSettings {
  std::optional<double> d_I;  // default: scenario d
  std::optional<double> d_R;
  bool r_coupling = true;     // false drops -alpha I R, making I and u the same equation
  std::optional<double> dt;
};

struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> max_excess;  // max (I - u) per snapshot
  std::vector<double> max_gap;     // max |I - u| per snapshot
  double worst_excess = 0.0;
  double tolerance = 0.0;
  bool dominated = true;
  double dt = 0.0;
  Field I_final, R_final, U_final, N_final;
};

ComparisonReport comparison_check(const Scenario& scenario, const ReducedSettings& settings = {});

}  // namespace sirs

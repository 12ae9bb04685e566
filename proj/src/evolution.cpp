#include "sirs/evolution.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sirs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Field sample_bump(const Bump& bump, const Grid& grid) {
  Field out(grid.size());
  for (Index k = 0; k < grid.size(); ++k) out(k) = bump.evaluate(grid.position(k));
  return out;
}

Grid domain_of(const Scenario& s) {
  return make_domain_grid(s.dimension, s.half_width, s.step, s.boundary);
}

bool divides(double part, double whole) {
  const double q = whole / part;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, q);
}

// Rounds the requested step down so that a whole number of steps fits in one trace
// interval (when that interval divides the run) or else in the whole run.
double fitted_step(double requested, const TimeSettings& time) {
  const double base =
      divides(time.trace_interval, time.final_time) ? time.trace_interval : time.final_time;
  const double n = std::ceil(base / requested - 1e-9);
  return base / std::max(1.0, n);
}

Index nearest_index(const Grid& grid, const Vec& x) {
  Index flat = 0;
  Index stride = 1;
  for (int a = 0; a < grid.dimension; ++a) {
    Index i = static_cast<Index>(std::lround((x(a) - grid.origin) / grid.spacing));
    i = std::clamp<Index>(i, 0, grid.points - 1);
    flat += i * stride;
    stride *= grid.points;
  }
  return flat;
}

}  // namespace

// ---------------------------------------------------------------------------

ImplicitDiffusion::ImplicitDiffusion(const Grid& grid, double coefficient) : grid_(grid) {
  const double c = coefficient / (grid.spacing * grid.spacing);
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(grid.points, 1.0 + 2.0 * c);
  const bool cyclic = grid.boundary == Boundary::periodic;
  if (!cyclic) {
    diag(0) = 1.0 + c;
    diag(grid.points - 1) = 1.0 + c;
  }
  line_ = TridiagonalSolver<double>(-c, std::move(diag), -c, cyclic);
}

void ImplicitDiffusion::solve_in_place(Field& u) const {
  if (grid_.dimension == 1) {
    line_.solve_in_place(u);
    return;
  }
  const Index n = grid_.points;
  Eigen::VectorXd buffer(n);
  // x-lines are contiguous, y-lines strided by n.
  for (Index j = 0; j < n; ++j) {
    buffer = u.segment(j * n, n);
    line_.solve_in_place(buffer);
    u.segment(j * n, n) = buffer;
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) buffer(j) = u(i + j * n);
    line_.solve_in_place(buffer);
    for (Index j = 0; j < n; ++j) u(i + j * n) = buffer(j);
  }
}

// ---------------------------------------------------------------------------

double positivity_time_step(const Scenario& s) {
  const Grid cell = make_cell_grid(s.dimension, s.cell_resolution);
  const double sup_alpha = sample_coefficient(s.alpha, cell).maxCoeff();
  const double sup_n0 = sample_coefficient(s.S0, cell).maxCoeff() + s.I0.height;
  const double rate = std::max({sup_alpha * sup_n0, sample_coefficient(s.mu, cell).maxCoeff(),
                                sample_coefficient(s.lambda, cell).maxCoeff()});
  return 1.0 / rate;
}

double default_time_step(const Scenario& s) {
  const DerivedCoefficients c = derive(s);
  const double sup_n0 = c.s0.maxCoeff() + s.I0.height;
  const double reaction =
      0.2 / (1.0 + std::max(0.0, c.gamma_star.maxCoeff()) + c.alpha.maxCoeff() * sup_n0);
  return std::min(reaction, 0.5 * positivity_time_step(s));
}

SirsIntegrator::SirsIntegrator(const Scenario& scenario, std::optional<double> dt) {
  validate(scenario);
  grid_ = domain_of(scenario);
  const double bound = positivity_time_step(scenario);
  dt_ = dt.value_or(default_time_step(scenario));
  if (!(dt_ > 0.0) || dt_ > bound * (1.0 + 1e-12)) {
    throw ValidationError(
        fmt::format("time step {} exceeds the non-negativity bound {}", dt_, bound));
  }
  alpha_ = sample_coefficient(scenario.alpha, grid_, "alpha");
  mu_ = sample_coefficient(scenario.mu, grid_, "mu");
  lambda_ = sample_coefficient(scenario.lambda, grid_, "lambda");
  s0_ = sample_coefficient(scenario.S0, grid_, "S0");
  i0_ = sample_bump(scenario.I0, grid_);
  diffusion_ = ImplicitDiffusion(grid_, dt_ * scenario.d);
}

EvolutionState SirsIntegrator::initial_state() const {
  EvolutionState st;
  st.S = s0_;
  st.I = i0_;
  st.R = Field::Zero(grid_.size());
  return st;
}

void SirsIntegrator::step(EvolutionState& st) const {
  const auto n = st.S.size();
  for (Index k = 0; k < n; ++k) {
    const double infection = alpha_(k) * st.S(k) * st.I(k);
    const double recovery = mu_(k) * st.I(k);
    const double waning = lambda_(k) * st.R(k);
    st.S(k) += dt_ * (waning - infection);
    st.I(k) += dt_ * (infection - recovery);
    st.R(k) += dt_ * (recovery - waning);
  }
  diffusion_.solve_in_place(st.S);
  diffusion_.solve_in_place(st.I);
  diffusion_.solve_in_place(st.R);
  st.t += dt_;
  ++st.step;

  const double lowest = std::min({st.S.minCoeff(), st.I.minCoeff(), st.R.minCoeff()});
  if (!(lowest >= -1e-12) || !st.S.allFinite() || !st.I.allFinite() || !st.R.allFinite()) {
    throw EvolutionError(
        fmt::format("state invalid at t = {} (step {}): min component value {}", st.t, st.step,
                    lowest),
        st);
  }
}

EvolutionState step(const EvolutionState& state, const Scenario& scenario, double dt) {
  const SirsIntegrator integrator(scenario, dt);
  EvolutionState next = state;
  integrator.step(next);
  return next;
}

// ---------------------------------------------------------------------------

double ray_extent(const Grid& grid, const Vec& e, const Vec& origin) {
  double extent = std::numeric_limits<double>::infinity();
  const double lo = grid.origin;
  const double hi = grid.origin + grid.spacing * static_cast<double>(grid.points - 1);
  for (int a = 0; a < grid.dimension; ++a) {
    if (e(a) > 0.0) extent = std::min(extent, (hi - origin(a)) / e(a));
    if (e(a) < 0.0) extent = std::min(extent, (origin(a) - lo) / -e(a));
  }
  return extent;
}

double front_position(const Grid& grid, const Field& I, double threshold, const Vec& e,
                      const Vec& origin) {
  const double extent = ray_extent(grid, e, origin);
  const double dr = grid.dimension == 1 ? grid.spacing : 0.5 * grid.spacing;
  const auto steps = static_cast<long>(std::floor(extent / dr + 1e-9));
  for (long s = steps; s >= 0; --s) {
    const double r = dr * static_cast<double>(s);
    if (I(nearest_index(grid, origin + r * e)) >= threshold) return r;
  }
  return kNegInf;
}

double front_position(const Grid& grid, const Field& I, double threshold, const Vec& e) {
  return front_position(grid, I, threshold, e, Vec::Zero(grid.dimension));
}

LinearFit measure_speed(const std::vector<double>& times, const std::vector<double>& positions,
                        double window_fraction) {
  if (times.size() != positions.size()) throw ValidationError("trace lengths differ");
  std::vector<std::pair<double, double>> finite;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::isfinite(positions[i])) finite.emplace_back(times[i], positions[i]);
  }
  const auto keep =
      static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(finite.size())));
  if (keep < 10) {
    throw ValidationError(
        fmt::format("insufficient samples for a speed fit: {} in the window", keep));
  }
  const std::vector<std::pair<double, double>> w(finite.end() - static_cast<long>(keep),
                                                 finite.end());
  double mt = 0.0, mr = 0.0;
  for (const auto& [t, r] : w) {
    mt += t;
    mr += r;
  }
  mt /= static_cast<double>(keep);
  mr /= static_cast<double>(keep);
  double stt = 0.0, str = 0.0;
  for (const auto& [t, r] : w) {
    stt += (t - mt) * (t - mt);
    str += (t - mt) * (r - mr);
  }
  LinearFit fit;
  fit.slope = str / stt;
  fit.intercept = mr - fit.slope * mt;
  double ss = 0.0;
  for (const auto& [t, r] : w) {
    const double e = r - (fit.intercept + fit.slope * t);
    ss += e * e;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(keep));
  fit.window_start = w.front().first;
  fit.samples = static_cast<int>(keep);
  return fit;
}

std::vector<Vec> default_directions(int dimension) {
  std::vector<Vec> out;
  if (dimension == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  const double s = std::sqrt(0.5);
  for (auto [x, y] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {s, s}}) {
    Vec e(2);
    e << x, y;
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------

SimulationResult simulate(const Scenario& scenario, const SimulationOptions& options) {
  validate(scenario);
  SimulationResult result;
  const Grid grid = domain_of(scenario);
  result.grid = grid;
  Diagnostics& diag = result.diagnostics;

  // Stationary reference on the cell sampled at the domain step, so the two grids
  // coincide modulo the period.
  const int commensurate = static_cast<int>(std::lround(1.0 / grid.spacing));
  const DerivedCoefficients cell = derive(scenario, commensurate);
  const StationaryOperators ops(cell);
  const Barriers barriers = compute_barriers(ops);
  diag.lambda1 = barriers.lambda1;
  diag.spreading_expected = barriers.assumption1_holds;
  if (barriers.assumption1_holds) {
    try {
      result.reference = fixed_point(ops, barriers);
    } catch (const SolverError&) {
      // Reported as a missing reference; the run itself does not depend on it.
    }
  }

  double threshold = 1e-3 * scenario.I0.height;
  if (scenario.front_threshold) {
    threshold = *scenario.front_threshold;
  } else if (result.reference) {
    threshold = 0.5 * result.reference->I_star.minCoeff();
  } else if (barriers.assumption1_holds) {
    threshold = 0.5 * barriers.I_bar.minCoeff();
  }

  const double dt =
      fitted_step(scenario.time.dt.value_or(default_time_step(scenario)), scenario.time);
  const SirsIntegrator integrator(scenario, dt);
  diag.dt = dt;
  const long total_steps = std::lround(scenario.time.final_time / dt);
  const long trace_every = std::max(1L, std::lround(scenario.time.trace_interval / dt));
  const long snapshot_every = std::max(1L, std::lround(scenario.time.snapshot_interval / dt));

  FrontTrace& trace = result.trace;
  trace.threshold = threshold;
  trace.directions = options.directions.empty() ? default_directions(grid.dimension)
                                                 : options.directions;
  trace.positions.assign(trace.directions.size(), {});
  const Vec origin = scenario.I0.center;

  EvolutionState st = integrator.initial_state();
  const double mass0 = (st.S + st.I + st.R).sum();
  diag.min_value = std::min({st.S.minCoeff(), st.I.minCoeff(), st.R.minCoeff()});

  auto record_trace = [&] {
    trace.times.push_back(st.t);
    for (std::size_t k = 0; k < trace.directions.size(); ++k) {
      const Vec& e = trace.directions[k];
      const double r = front_position(grid, st.I, threshold, e, origin);
      trace.positions[k].push_back(r);
      if (r > ray_extent(grid, e, origin) - 5.0 * grid.spacing) {
        throw DomainTooSmall(fmt::format(
            "domain too small: front at r = {} within 5 cells of the boundary at t = {}", r,
            st.t));
      }
    }
    const double mass = (st.S + st.I + st.R).sum();
    diag.mass_drift = std::max(diag.mass_drift, std::abs(mass - mass0) / mass0);
    diag.min_value =
        std::min({diag.min_value, st.S.minCoeff(), st.I.minCoeff(), st.R.minCoeff()});
  };
  auto record_snapshot = [&] {
    const Field N = st.S + st.I + st.R;
    diag.homogenization.push_back(sup_norm((N.array() - N.mean()).matrix()));
    Snapshot snap{st.t, st.S, st.I, st.R};
    if (options.on_snapshot) options.on_snapshot(snap);
    if (options.keep_snapshots) result.snapshots.push_back(std::move(snap));
  };

  record_trace();
  record_snapshot();
  for (long n = 1; n <= total_steps; ++n) {
    integrator.step(st);
    if (n % trace_every == 0 || n == total_steps) record_trace();
    if (n % snapshot_every == 0 || n == total_steps) record_snapshot();
  }
  diag.steps = st.step;

  for (const auto& positions : trace.positions) {
    try {
      trace.fits.emplace_back(measure_speed(trace.times, positions));
    } catch (const ValidationError&) {
      trace.fits.emplace_back(std::nullopt);
    }
  }

  diag.sup_I_final = sup_norm(st.I);
  diag.sup_S_deviation_final = sup_norm((st.S.array() - cell.M).matrix());
  diag.classification = diag.sup_I_final < scenario.tol.extinction ? "extinct" : "spreading";
  const Index centre = nearest_index(grid, origin);
  diag.centre_values = {st.S(centre), st.I(centre), st.R(centre)};
  if (result.reference) {
    Index cell_index = 0;
    Index stride = 1;
    for (int a = 0; a < grid.dimension; ++a) {
      const double x = grid.coordinate(centre, a);
      const double frac = x - std::floor(x);
      cell_index += (std::lround(frac * commensurate) % commensurate) * stride;
      stride *= commensurate;
    }
    const auto& ref = *result.reference;
    diag.centre_reference = std::array<double, 3>{ref.S_star(cell_index), ref.I_star(cell_index),
                                                  ref.R_star(cell_index)};
  }
  return result;
}

// ---------------------------------------------------------------------------

ComparisonReport comparison_check(const Scenario& scenario, const ReducedSettings& settings) {
  validate(scenario);
  const Grid grid = domain_of(scenario);
  const double d_I = settings.d_I.value_or(scenario.d);
  const double d_R = settings.d_R.value_or(scenario.d);
  if (!(d_I > 0.0) || !(d_R > 0.0)) throw ValidationError("diffusivities must be positive");

  const Field alpha = sample_coefficient(scenario.alpha, grid, "alpha");
  const Field mu = sample_coefficient(scenario.mu, grid, "mu");
  const Field lambda = sample_coefficient(scenario.lambda, grid, "lambda");
  const Field i0 = sample_bump(scenario.I0, grid);
  Field N = sample_coefficient(scenario.S0, grid, "S0") + i0;

  // Order preservation of u -> u + dt (gamma u - alpha u^2) needs dt (mu + 2 alpha sup u) <= 1.
  const double monotone = 0.5 / (mu.maxCoeff() + 2.0 * alpha.maxCoeff() * N.maxCoeff());
  const double requested =
      settings.dt.value_or(std::min(default_time_step(scenario), monotone));
  const double dt = fitted_step(requested, scenario.time);
  if (dt > positivity_time_step(scenario) * (1.0 + 1e-12)) {
    throw ValidationError(fmt::format("time step {} exceeds the non-negativity bound", dt));
  }
  const ImplicitDiffusion diffuse_N(grid, dt * scenario.d);
  const ImplicitDiffusion diffuse_I(grid, dt * d_I);
  const ImplicitDiffusion diffuse_R(grid, dt * d_R);

  Field I = i0, U = i0, R = Field::Zero(grid.size());
  ComparisonReport rep;
  rep.dt = dt;
  rep.tolerance = 1e-6 + 1e-3 * dt;
  const long total = std::lround(scenario.time.final_time / dt);
  const long every = std::max(1L, std::lround(scenario.time.snapshot_interval / dt));
  const double coupling = settings.r_coupling ? 1.0 : 0.0;

  auto compare = [&](double t) {
    rep.times.push_back(t);
    rep.max_excess.push_back((I - U).maxCoeff());
    rep.max_gap.push_back(sup_norm(I - U));
    rep.worst_excess = std::max(rep.worst_excess, rep.max_excess.back());
  };
  compare(0.0);
  for (long n = 1; n <= total; ++n) {
    for (Index k = 0; k < grid.size(); ++k) {
      const double g = alpha(k) * N(k) - mu(k);
      const double dI = g * I(k) - alpha(k) * I(k) * I(k) - coupling * alpha(k) * I(k) * R(k);
      const double dR = mu(k) * I(k) - lambda(k) * R(k);
      const double dU = g * U(k) - alpha(k) * U(k) * U(k);
      I(k) += dt * dI;
      R(k) += dt * dR;
      U(k) += dt * dU;
    }
    diffuse_N.solve_in_place(N);
    diffuse_I.solve_in_place(I);
    diffuse_R.solve_in_place(R);
    diffuse_I.solve_in_place(U);
    if (n % every == 0 || n == total) compare(dt * static_cast<double>(n));
  }
  rep.dominated = rep.worst_excess <= rep.tolerance;
  rep.I_final = std::move(I);
  rep.R_final = std::move(R);
  rep.U_final = std::move(U);
  rep.N_final = std::move(N);
  return rep;
}

}  // namespace sirs

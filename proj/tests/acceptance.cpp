// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "frozen_values.hpp"
#include "oracle.hpp"
#include "sirs/app/commands.hpp"
#include "sirs/evolution.hpp"
#include "sirs/principal_eigen.hpp"
#include "sirs/scenario_io.hpp"
#include "sirs/speeds.hpp"
#include "sirs/stationary.hpp"

using namespace sirs;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* id, const char* title, bool pass, const std::string& detail) {
  std::printf("%s %s  %s: %s\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs `body`, turning an exception into a failed criterion.
void criterion(const char* id, const char* title,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail += fmt::format(" exception: {}", e.what());
  }
  report(id, title, pass, detail);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Scenario scenario_file(const char* name) {
  return load_scenario(std::string(SIRS_SCENARIO_DIR) + "/" + name);
}

Scenario hom1_cell() {
  Scenario s;
  s.d = 1.0;
  s.alpha = Constant{1.0};
  s.mu = Constant{1.0};
  s.lambda = Constant{5.0};
  s.S0 = Constant{2.0};
  s.I0.center = Vec::Zero(1);
  return s;
}

double sup_at_probes(const Field& f, const std::array<double, 3>& want) {
  double err = 0.0;
  for (int p = 0; p < 3; ++p) err = std::max(err, std::abs(f(frozen::probe[p]) - want[p]));
  return err;
}

Field random_member(const Barriers& b, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Field f(b.I_bar.size());
  for (Index k = 0; k < f.size(); ++k) f(k) = b.I_under(k) + u(rng) * (b.I_bar(k) - b.I_under(k));
  return f;
}

Scenario random_scenario(std::mt19937& rng, int resolution) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Scenario s = hom1_cell();
  s.cell_resolution = resolution;
  s.d = 0.5 + u(rng);
  s.S0 = Constant{1.8 + 0.6 * u(rng)};
  s.lambda = CosineSeries{10.0 + 30.0 * u(rng), {CosineTerm{2.0 * u(rng), {1}, 6.0 * u(rng)}}};
  s.mu = CosineSeries{1.0, {CosineTerm{0.5 * u(rng), {1}, 6.0 * u(rng)}}};
  s.alpha = CosineSeries{1.0, {CosineTerm{0.3 * u(rng), {2}, 6.0 * u(rng)}}};
  return s;
}

}  // namespace

int main() {
  const Vec e1 = Vec::Constant(1, 1.0);

  criterion("AC1", "homogeneous eigenvalue", [&](std::string& out) {
    const auto t0 = Clock::now();
    const Grid g = make_cell_grid(1, 256);
    const Field gamma = Field::Ones(256);
    const double l1 = principal_eigenpair(g, gamma, 1.0).eigenvalue;
    const double k1 = drifted_principal_eigenvalue(g, gamma, 1.0, e1).eigenvalue;
    const double t = seconds_since(t0);
    out = fmt::format("lambda1 = {:.12f}, k(1) = {:.12f}, {:.3f} s at resolution 256", l1, k1, t);
    return std::abs(l1 + 1.0) < 1e-8 && std::abs(k1 + 2.0) < 1e-8 && t < 1.0;
  });

  criterion("AC2", "homogeneous speeds", [&](std::string& out) {
    const auto t0 = Clock::now();
    const DerivedCoefficients c = derive(hom1_cell());
    const Barriers b = compute_barriers(c);
    const SpeedResult w = fg_speed(c.grid, c.gamma_star, c.d, e1);
    const SpeedPair p = speed_pair(c, b, e1);
    const double t = seconds_since(t0);
    out = fmt::format("fg_speed = {:.8f}, lower = {:.8f} (2 sqrt 0.8 = {:.8f}), {:.3f} s", w.speed,
                      p.lower.speed, 2 * std::sqrt(0.8), t);
    return std::abs(w.speed - 2.0) < 1e-4 && std::abs(p.lower.speed - 2 * std::sqrt(0.8)) < 1e-4 &&
           t < 10.0;
  });

  criterion("AC3", "homogeneous equilibrium", [&](std::string& out) {
    const auto t0 = Clock::now();
    const StationaryState st = fixed_point(derive(hom1_cell()));
    const double t = seconds_since(t0);
    const double es = sup_norm((st.S_star.array() - 1.0).matrix());
    const double ei = sup_norm((st.I_star.array() - 5.0 / 6.0).matrix());
    const double er = sup_norm((st.R_star.array() - 1.0 / 6.0).matrix());
    const double res = std::max({st.residual_S, st.residual_I, st.residual_R});
    out = fmt::format(
        "errors S {:.2e} I {:.2e} R {:.2e}, residual {:.2e}, contraction {:.4f}, {} iterations, "
        "{:.3f} s",
        es, ei, er, res, st.contraction_estimate, st.iterations, t);
    return es < 1e-6 && ei < 1e-6 && er < 1e-6 && res < 1e-8 && st.contraction_estimate <= 0.25 &&
           t < 30.0;
  });

  criterion("AC4", "spreading sandwich", [&](std::string& out) {
    const auto t0 = Clock::now();
    const Scenario s = scenario_file("hom1.yaml");
    const bool setup = s.half_width == 300.0 && s.step == 1.0 / 32.0 &&
                       s.time.final_time == 120.0;
    const SimulationResult r = simulate(s, {{e1, -e1}, false, {}});
    const double t = seconds_since(t0);
    bool ok = setup;
    std::string speeds;
    for (const auto& fit : r.trace.fits) {
      ok = ok && fit && fit->slope >= 1.70 && fit->slope <= 2.10;
      speeds += fit ? fmt::format(" {:.4f}", fit->slope) : " none";
    }
    const auto& c = r.diagnostics.centre_values;
    const double dc = std::max({std::abs(c[0] - 1.0), std::abs(c[1] - 5.0 / 6.0),
                                std::abs(c[2] - 1.0 / 6.0)});
    out = fmt::format("speeds{} in [1.70, 2.10], centre ({:.5f}, {:.5f}, {:.5f}) off by {:.2e}, "
                      "{:.1f} s",
                      speeds, c[0], c[1], c[2], dc, t);
    return ok && dc < 1e-2 && t < 300.0;
  });

  criterion("AC5", "extinction", [&](std::string& out) {
    const auto t0 = Clock::now();
    const Scenario s = scenario_file("ext1.yaml");
    const SimulationResult r = simulate(s, {{}, false, {}});
    const double t = seconds_since(t0);
    const Diagnostics& d = r.diagnostics;
    out = fmt::format("sup I(T) = {:.2e}, sup |S - 1| = {:.2e}, {}, lambda1 = {:.6f}, {:.1f} s",
                      d.sup_I_final, d.sup_S_deviation_final, d.classification, d.lambda1, t);
    return s.time.final_time == 100.0 && d.sup_I_final < 1e-4 && d.sup_S_deviation_final < 1e-2 &&
           d.classification == "extinct" && d.lambda1 >= 0.0 && !d.spreading_expected && t < 60.0;
  });

  criterion("AC6", "heterogeneous oracle agreement", [&](std::string& out) {
    const Scenario s = scenario_file("het1.yaml");
    const DerivedCoefficients c = derive(s);
    const int n = static_cast<int>(c.grid.points);
    if (n != frozen::resolution) throw std::runtime_error("het1.yaml resolution changed");
    const StationaryOperators ops(c);
    const Barriers b = compute_barriers(ops);

    double eig = std::abs(b.lambda1 - frozen::lambda1);
    eig = std::max(eig, std::abs(b.lambda1_reduced - frozen::lambda1_reduced));
    eig = std::max(eig, std::abs(drifted_principal_eigenvalue(c.grid, c.gamma_star, c.d, e1).eigenvalue -
                                 frozen::k_at_1));
    for (int j = 1; j <= 20; ++j) {
      const double k =
          drifted_principal_eigenvalue(c.grid, c.gamma_star, c.d, Vec::Constant(1, 0.15 * j))
              .eigenvalue;
      eig = std::max(eig, std::abs(k - frozen::k_rho[j - 1]));
    }

    const SpeedPair p = speed_pair(c, b, e1);
    const double spd = std::max(std::abs(p.upper.speed - frozen::w_upper),
                                std::abs(p.lower.speed - frozen::w_lower));

    // Fields: frozen probes from the numpy oracle, full sup norm against the dense C++ oracle.
    const StationaryState st = fixed_point(ops, b);
    const Field ratio = c.gamma_star.cwiseQuotient(c.alpha);
    const Field I_bar = oracle::newton_T(n, c.d, c.alpha, ratio);
    const Field R_bar = oracle::solve_Z(n, c.d, c.mu, c.lambda, I_bar);
    const Field I_under = oracle::newton_T(n, c.d, c.alpha, ratio - R_bar);
    const oracle::Endemic fp =
        oracle::newton_endemic(n, c.d, c.M, c.alpha, c.mu, c.lambda, I_bar, R_bar);
    double fields = std::max({sup_at_probes(b.I_bar, frozen::I_bar),
                              sup_at_probes(b.R_bar, frozen::R_bar),
                              sup_at_probes(b.I_under, frozen::I_under),
                              sup_at_probes(st.I_star, frozen::I_star),
                              sup_at_probes(st.R_star, frozen::R_star),
                              sup_at_probes(st.S_star, frozen::S_star)});
    fields = std::max({fields, sup_norm(Field(b.I_bar - I_bar)), sup_norm(Field(b.R_bar - R_bar)),
                       sup_norm(Field(b.I_under - I_under)), sup_norm(Field(st.I_star - fp.I)),
                       sup_norm(Field(st.R_star - fp.R)), sup_norm(Field(st.S_star - fp.S))});
    out = fmt::format(
        "eigen max err {:.2e} (22 values), speeds max err {:.2e} (w* = {:.6f}, w_* = {:.6f}), "
        "fields sup err {:.2e} (oracle residual {:.1e})",
        eig, spd, p.upper.speed, p.lower.speed, fields, fp.residual);
    return eig < 1e-6 && spd < 1e-4 && fields < 1e-6 && fp.residual < 1e-9;
  });

  criterion("AC7", "property suites", [&](std::string& out) {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Scenario het = scenario_file("het1.yaml");
    const DerivedCoefficients c = derive(het);
    const StationaryOperators ops(c);
    const Barriers b = compute_barriers(ops);
    const double slack = 1e-9;

    // Order: Z preserves, T o A o Z reverses, its square preserves.
    bool order = true;
    for (int trial = 0; trial < 20; ++trial) {
      const Field lo = random_member(b, rng);
      Field hi = lo;
      for (Index k = 0; k < hi.size(); ++k) hi(k) += u(rng) * (b.I_bar(k) - lo(k));
      const Field tl = ops.taz(lo), th = ops.taz(hi);
      order = order && (ops.Z(hi) - ops.Z(lo)).minCoeff() >= -slack &&
              (tl - th).minCoeff() >= -slack && (ops.taz(th) - ops.taz(tl)).minCoeff() >= -slack;
    }

    // Invariance of the barrier interval.
    bool invariant = invariant_set_check(ops.taz(b.I_bar), b);
    for (int trial = 0; trial < 20; ++trial) {
      invariant = invariant && invariant_set_check(ops.taz(random_member(b, rng)), b);
    }

    // Lipschitz bound on 50 random pairs.
    const double bound = c_taz_bound(c) + 0.05;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Field a = random_member(b, rng), z = random_member(b, rng);
      worst_ratio = std::max(worst_ratio, l2_norm(c.grid, Field(ops.taz(a) - ops.taz(z))) /
                                              l2_norm(c.grid, Field(a - z)));
    }
    const bool lipschitz = worst_ratio <= bound;

    // Barrier bounds and speed ordering on random scenarios.
    bool barriers_ok = true;
    bool ordering = true;
    double worst_gap = -1e9;
    for (int trial = 0; trial < 10; ++trial) {
      const Scenario s = random_scenario(rng, 64);
      const DerivedCoefficients rc = derive(s);
      const StationaryOperators rops(rc);
      const Barriers rb = compute_barriers(rops);
      const StationaryState st = fixed_point(rops, rb);
      barriers_ok = barriers_ok && rb.assumption1_holds &&
                    (rb.I_bar - rb.I_under).minCoeff() >= -slack &&
                    invariant_set_check(st.I_star, rb) &&
                    (rb.R_bar - st.R_star).minCoeff() >= -1e-7 && st.S_star.minCoeff() > 0.0;
      const SpeedPair p = speed_pair(rc, rb, e1);
      worst_gap = std::max(worst_gap, p.lower.speed - p.upper.speed);
      ordering = ordering && p.lower.speed <= p.upper.speed * (1.0 + 2.0 * rc.tol.speed);
    }

    // Mass conservation and logistic supersolution domination.
    Scenario hom = scenario_file("hom1.yaml");
    hom.half_width = 80.0;
    hom.time.final_time = 30.0;
    Scenario het_run = het;
    het_run.half_width = 80.0;
    het_run.time.final_time = 30.0;
    Scenario ext = scenario_file("ext1.yaml");
    double drift = 0.0;
    bool dominated = true;
    double worst_excess = -1.0;
    for (Scenario* s : {&hom, &het_run, &ext}) {
      drift = std::max(drift, simulate(*s, {{}, false, {}}).diagnostics.mass_drift);
      const ComparisonReport cr = comparison_check(*s);
      dominated = dominated && cr.dominated && cr.times.size() >= 3;
      worst_excess = std::max(worst_excess, cr.worst_excess);
    }
    const bool mass = drift < 1e-10;

    out = fmt::format(
        "order {}, invariance {}, Lipschitz {} ({:.4f} <= {:.4f}), barrier bounds {}, "
        "w_* <= w* {} (max w_* - w* = {:.3f}), mass {} ({:.1e}), domination {} (max excess {:.1e})",
        order ? "ok" : "FAIL", invariant ? "ok" : "FAIL", lipschitz ? "ok" : "FAIL", worst_ratio,
        bound, barriers_ok ? "ok" : "FAIL", ordering ? "ok" : "FAIL", worst_gap,
        mass ? "ok" : "FAIL", drift, dominated ? "ok" : "FAIL", worst_excess);
    return order && invariant && lipschitz && barriers_ok && ordering && mass && dominated;
  });

  criterion("AC8", "threshold bisection", [&](std::string& out) {
    bool ok = true;
    for (auto [alpha, mu] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {1.0, 2.0}}) {
      Scenario s = hom1_cell();
      s.alpha = Constant{alpha};
      s.mu = Constant{mu};
      const app::ThresholdResult r = app::threshold_bisection(s, "S0.value", 0.25, 4.0);
      const double err = std::abs(r.critical - mu / alpha);
      ok = ok && r.sign_change && err < 1e-4;
      out += fmt::format("(alpha {}, mu {}) -> {:.6f} err {:.1e}; ", alpha, mu, r.critical, err);
    }
    return ok;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

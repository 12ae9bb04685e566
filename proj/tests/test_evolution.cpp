#include <doctest.h>

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sirs/errors.hpp"
#include "sirs/evolution.hpp"
#include "sirs/speeds.hpp"

using namespace sirs;
using std::numbers::pi;

namespace {

Scenario homogeneous(double mu, double lambda, double s0, double half_width, double final_time) {
  Scenario s;
  s.alpha = Constant{1.0};
  s.mu = Constant{mu};
  s.lambda = Constant{lambda};
  s.S0 = Constant{s0};
  s.I0.center = Vec::Zero(1);
  s.half_width = half_width;
  s.time.final_time = final_time;
  s.time.snapshot_interval = final_time / 10.0;
  return s;
}

Scenario hom1(double half_width, double final_time) {
  return homogeneous(1.0, 5.0, 2.0, half_width, final_time);
}

double total(const EvolutionState& st) { return (st.S + st.I + st.R).sum(); }

}  // namespace

TEST_CASE("implicit diffusion matches a dense solve and conserves the sum") {
  for (Boundary bc : {Boundary::periodic, Boundary::neumann}) {
    const Grid g = make_domain_grid(1, 2.0, 0.125, bc);
    Field u(g.size());
    for (Index k = 0; k < g.size(); ++k) u(k) = std::exp(-std::pow(g.coordinate(k, 0) - 0.3, 2));
    const double c = 0.7;
    // assemble() gives -Lap, so I - c Lap = I + c * assemble().
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(g.size(), g.size()) +
                              c * Eigen::MatrixXd(assemble(g, {1.0, Vec(), Field()}));
    const Field want = A.partialPivLu().solve(u);
    Field got = u;
    ImplicitDiffusion(g, c).solve_in_place(got);
    CHECK(sup_norm(got - want) < 1e-13);
    CHECK(std::abs(got.sum() - u.sum()) < 1e-12 * u.sum());
  }
  const Grid g2 = make_domain_grid(2, 2.0, 0.25);
  Field v(g2.size());
  for (Index k = 0; k < g2.size(); ++k) v(k) = 1.0 + std::sin(0.3 * static_cast<double>(k));
  const double before = v.sum();
  ImplicitDiffusion(g2, 0.4).solve_in_place(v);
  CHECK(std::abs(v.sum() - before) < 1e-12 * before);
}

TEST_CASE("infection-free equilibrium is stationary") {
  const Scenario s = hom1(20.0, 1.0);
  const SirsIntegrator integ(s);
  EvolutionState st = integ.initial_state();
  st.S.setConstant(1.7);
  st.I.setZero();
  st.R.setZero();
  for (int n = 0; n < 10; ++n) integ.step(st);
  CHECK(sup_norm((st.S.array() - 1.7).matrix()) < 1e-13);
  CHECK(sup_norm(st.I) == 0.0);
  CHECK(sup_norm(st.R) == 0.0);
}

TEST_CASE("decoupled decay of the infected") {
  Scenario s = homogeneous(0.5, 1e-14, 1.0, 10.0, 4.0);
  s.alpha = Constant{1e-14};
  const SirsIntegrator integ(s, 0.01);
  EvolutionState st = integ.initial_state();
  st.I.setConstant(0.5);
  for (int n = 0; n < 400; ++n) integ.step(st);
  CHECK(sup_norm(st.I) == doctest::Approx(0.5 * std::exp(-0.5 * 4.0)).epsilon(0.01));
}

TEST_CASE("a single step conserves the total mass") {
  const Scenario s = hom1(40.0, 1.0);
  const SirsIntegrator integ(s);
  EvolutionState st = integ.initial_state();
  const double before = total(st);
  integ.step(st);
  CHECK(std::abs(total(st) - before) <= 1e-12 * before);
  CHECK(st.step == 1);
  CHECK(st.t == doctest::Approx(integ.dt()));
}

TEST_CASE("time step bounds") {
  const Scenario s = hom1(40.0, 1.0);
  const double bound = positivity_time_step(s);
  CHECK(bound == doctest::Approx(1.0 / 5.0));
  CHECK(default_time_step(s) <= 0.5 * bound);
  CHECK(default_time_step(s) == doctest::Approx(0.2 / (1.0 + 1.0 + 2.1)));
  CHECK_THROWS_AS(SirsIntegrator(s, 1.5 * bound), ValidationError);
  CHECK_NOTHROW(step(SirsIntegrator(s).initial_state(), s, bound));
}

TEST_CASE("front position") {
  const Grid g = make_domain_grid(1, 20.0, 0.125);
  const Vec e = Vec::Constant(1, 1.0);
  CHECK(front_position(g, Field::Zero(g.size()), 0.1, e) ==
        -std::numeric_limits<double>::infinity());
  Field I(g.size());
  for (Index k = 0; k < g.size(); ++k) I(k) = std::abs(g.coordinate(k, 0)) < 5.0 ? 1.0 : 0.0;
  CHECK(front_position(g, I, 0.5, e) == doctest::Approx(5.0).epsilon(0.125 / 5.0));
  CHECK(front_position(g, I, 0.5, -e) == doctest::Approx(5.0).epsilon(0.125 / 5.0));

  const Grid g2 = make_domain_grid(2, 10.0, 0.125);
  Field J(g2.size());
  for (Index k = 0; k < g2.size(); ++k) J(k) = g2.position(k).norm() < 5.0 ? 1.0 : 0.0;
  Vec d(2);
  d << std::sqrt(0.5), std::sqrt(0.5);
  CHECK(std::abs(front_position(g2, J, 0.5, d) - 5.0) < 0.125);
  CHECK(ray_extent(g2, d, Vec::Zero(2)) == doctest::Approx(std::sqrt(2.0) * 9.875));
}

TEST_CASE("speed fits on synthetic traces") {
  std::vector<double> t, linear, wobbly;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.5 * i);
    linear.push_back(2.0 * t.back() + 3.0);
    wobbly.push_back(2.0 * t.back() + std::sin(t.back()));
  }
  const LinearFit f = measure_speed(t, linear);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.rms_residual < 1e-10);
  const LinearFit w = measure_speed(t, wobbly);
  CHECK(w.window_start == doctest::Approx(60.0).epsilon(0.01));
  CHECK(std::abs(w.slope - 2.0) < 0.05);
  CHECK_THROWS_AS(measure_speed({0, 1, 2, 3}, {0, 1, 2, 3}), ValidationError);
}

TEST_CASE("short homogeneous run: invariants") {
  Scenario s = hom1(60.0, 20.0);
  s.time.snapshot_interval = 2.0;
  const SimulationResult r = simulate(s);
  const Diagnostics& d = r.diagnostics;
  CHECK(d.mass_drift < 1e-10);
  CHECK(d.min_value >= -1e-12);
  CHECK(d.classification == "spreading");
  CHECK(d.spreading_expected);
  REQUIRE(d.homogenization.size() == 11);
  for (std::size_t i = 1; i < d.homogenization.size(); ++i) {
    CHECK(d.homogenization[i] < d.homogenization[i - 1]);
  }
  CHECK(r.snapshots.size() == 11);
  CHECK(r.snapshots.back().t == doctest::Approx(20.0));
  const auto& pos = r.trace.positions[0];
  for (std::size_t i = pos.size() / 4; i + 1 < pos.size(); ++i) CHECK(pos[i + 1] >= pos[i]);
  REQUIRE(r.trace.fits[0]);
  CHECK(r.trace.fits[0]->slope >= 0.0);
}

TEST_CASE("Neumann box also conserves mass") {
  Scenario s = hom1(30.0, 5.0);
  s.boundary = Boundary::neumann;
  s.I0.center = Vec::Constant(1, 10.0);
  CHECK(simulate(s).diagnostics.mass_drift < 1e-10);
}

TEST_CASE("front trace is self-consistent") {
  const SimulationResult r = simulate(hom1(300.0, 100.0), {{Vec::Constant(1, 1.0)}, false, {}});
  const auto& t = r.trace.times;
  const auto& p = r.trace.positions[0];
  auto at = [&](double when) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (std::abs(t[i] - when) < 1e-6) return p[i];
    }
    FAIL("time not sampled");
    return 0.0;
  };
  REQUIRE(r.trace.fits[0]);
  const double slope = r.trace.fits[0]->slope;
  CHECK(slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK((at(100.0) - at(50.0)) / 50.0 == doctest::Approx(slope).epsilon(0.10));
}

TEST_CASE("heterogeneous run lies inside the predicted sandwich") {
  Scenario s = hom1(200.0, 80.0);
  s.lambda = Constant{20.0};
  s.mu = CosineSeries{1.0, {CosineTerm{0.5, {1}, 0.0}}};
  const SimulationResult r = simulate(s, {{Vec::Constant(1, 1.0)}, false, {}});
  const SpeedPair p = speed_pair(s, Vec::Constant(1, 1.0));
  REQUIRE(r.trace.fits[0]);
  const double w = r.trace.fits[0]->slope;
  CHECK(w >= p.lower.speed * 0.93);
  CHECK(w <= p.upper.speed * 1.07);
}

TEST_CASE("extinction run") {
  Scenario s = homogeneous(2.0, 1.0, 1.0, 50.0, 100.0);
  const SimulationResult r = simulate(s, {{}, false, {}});
  CHECK(r.diagnostics.classification == "extinct");
  CHECK_FALSE(r.diagnostics.spreading_expected);
  CHECK(r.diagnostics.sup_I_final < 1e-4);
  CHECK(r.diagnostics.sup_S_deviation_final < 1e-2);
  CHECK_FALSE(r.reference.has_value());
}

TEST_CASE("a front reaching the box edge is an error") {
  try {
    simulate(hom1(20.0, 20.0));
    FAIL("expected DomainTooSmall");
  } catch (const DomainTooSmall& e) {
    CHECK(std::string(e.what()).find("domain too small") != std::string::npos);
  }
}

TEST_CASE("two-dimensional run") {
  Scenario s = hom1(20.0, 6.0);
  s.dimension = 2;
  s.step = 0.125;
  s.I0 = Bump{Vec::Zero(2), 2.0, 0.5};
  s.cell_resolution = 16;
  const SimulationResult r = simulate(s, {{}, false, {}});
  CHECK(r.trace.directions.size() == 5);
  CHECK(r.diagnostics.mass_drift < 1e-10);
  CHECK(r.diagnostics.min_value >= -1e-12);
  // Radial symmetry: the axis fronts agree.
  const auto& p = r.trace.positions;
  REQUIRE(std::isfinite(p[0].back()));
  CHECK(p[0].back() == doctest::Approx(p[2].back()));
  CHECK(p[1].back() == doctest::Approx(p[3].back()));
}

TEST_CASE("reduced system and the logistic comparison") {
  SUBCASE("without R coupling the two equations coincide") {
    ReducedSettings rs;
    rs.r_coupling = false;
    const ComparisonReport c = comparison_check(hom1(60.0, 15.0), rs);
    CHECK(sup_norm(Field(c.I_final - c.U_final)) < 1e-12);
    CHECK(c.dominated);
  }
  SUBCASE("equal diffusivities reproduce the full system") {
    const Scenario s = hom1(60.0, 15.0);
    const SimulationResult full = simulate(s);
    ReducedSettings rs;
    rs.dt = full.diagnostics.dt;
    const ComparisonReport c = comparison_check(s, rs);
    CHECK(c.dt == doctest::Approx(full.diagnostics.dt).epsilon(1e-14));
    CHECK(sup_norm(Field(c.I_final - full.snapshots.back().I)) < 1e-10);
    CHECK(sup_norm(Field(c.R_final - full.snapshots.back().R)) < 1e-10);
  }
  SUBCASE("domination in spreading and extinct regimes, unequal diffusivities") {
    CHECK(comparison_check(hom1(60.0, 15.0)).dominated);
    CHECK(comparison_check(homogeneous(2.0, 1.0, 1.0, 30.0, 20.0)).dominated);
    ReducedSettings rs;
    rs.d_I = 0.5;
    rs.d_R = 2.0;
    const ComparisonReport c = comparison_check(hom1(60.0, 15.0), rs);
    CHECK(c.dominated);
    CHECK(c.worst_excess <= c.tolerance);
    CHECK(c.max_gap.back() > 0.0);
  }
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "frozen_values.hpp"
#include "oracle.hpp"
#include "sirs/principal_eigen.hpp"

using namespace sirs;
using std::numbers::pi;

namespace {

Field het1_gamma(const Grid& g) {
  Field out(g.size());
  for (Index k = 0; k < g.size(); ++k) out(k) = 1.0 - 0.5 * std::cos(2 * pi * g.coordinate(k, 0));
  return out;
}

// Smooth random periodic field: a few random Fourier modes.
Field random_gamma(const Grid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double a[3], b[3], c[2];
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  for (auto& v : c) v = u(rng);
  Field out(g.size());
  for (Index k = 0; k < g.size(); ++k) {
    const double x = g.coordinate(k, 0);
    const double y = g.dimension == 2 ? g.coordinate(k, 1) : 0.0;
    out(k) = c[0] + a[0] * std::cos(2 * pi * x) + b[0] * std::sin(2 * pi * x) +
             a[1] * std::cos(4 * pi * x + b[1]) + c[1] * std::cos(2 * pi * y + a[2]) +
             b[2] * std::sin(2 * pi * (x + y));
  }
  return out;
}

std::vector<double> as_vector(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("constant potential") {
  for (int dim : {1, 2}) {
    const Grid g = make_cell_grid(dim, dim == 1 ? 64 : 16);
    for (double d : {0.1, 1.0, 3.0}) {
      for (double c : {-2.0, 0.0, 0.5, 1.0}) {
        const EigenResult r = principal_eigenpair(g, Field::Constant(g.size(), c), d);
        CHECK(std::abs(r.eigenvalue + c) < (c == 0.0 ? 1e-10 : 1e-8));
        CHECK(r.eigenfunction.maxCoeff() == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("drifted operator with constant potential") {
  const Grid g = make_cell_grid(1, 128);
  for (double rho : {-2.0, -0.5, 0.3, 1.0, 4.0}) {
    const Vec r = Vec::Constant(1, rho);
    const EigenResult k = drifted_principal_eigenvalue(g, Field::Constant(128, 1.0), 1.0, r);
    CHECK(std::abs(k.eigenvalue + (rho * rho + 1.0)) < 1e-8);
  }
  const Grid g2 = make_cell_grid(2, 16);
  Vec r2(2);
  r2 << 0.6, -0.8;
  const EigenResult k2 = drifted_principal_eigenvalue(g2, Field::Constant(256, 2.0), 0.5, r2);
  CHECK(std::abs(k2.eigenvalue + (0.5 * 1.0 + 2.0)) < 1e-8);
}

TEST_CASE("heterogeneous potential against the dense oracle") {
  const Grid g = make_cell_grid(1, frozen::resolution);
  const Field gamma = het1_gamma(g);
  const EigenResult r = principal_eigenpair(g, gamma, 1.0);
  CHECK(std::abs(r.eigenvalue - frozen::lambda1) < 1e-8);
  // lambda1 <= -mean(gamma) by the Rayleigh quotient of the constant.
  CHECK(r.eigenvalue < -1.0);
  CHECK(r.eigenvalue > -1.5);
  CHECK(r.eigenfunction.minCoeff() > 0.0);
  CHECK(r.residual < 1e-7);

  const EigenResult k0 = drifted_principal_eigenvalue(g, gamma, 1.0, Vec::Zero(1));
  CHECK(std::abs(k0.eigenvalue - r.eigenvalue) < 1e-8);
  const EigenResult k1 = drifted_principal_eigenvalue(g, gamma, 1.0, Vec::Constant(1, 1.0));
  CHECK(std::abs(k1.eigenvalue - frozen::k_at_1) < 1e-8);

  const Field* warm = nullptr;
  EigenResult last;
  for (int j = 1; j <= 20; ++j) {
    last = drifted_principal_eigenvalue(g, gamma, 1.0, Vec::Constant(1, 0.15 * j), {}, warm);
    warm = &last.eigenfunction;
    CHECK(std::abs(last.eigenvalue - frozen::k_rho[j - 1]) < 1e-7);
  }
}

TEST_CASE("random potentials against the C++ dense oracle") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    const int dim = trial < 4 ? 1 : 2;
    const int n = dim == 1 ? 48 : 12;
    const Grid g = make_cell_grid(dim, n);
    const Field gamma = random_gamma(g, rng);
    const double d = 0.3 + 0.4 * trial;
    Vec rho(dim);
    for (int a = 0; a < dim; ++a) rho(a) = u(rng);
    const double want = oracle::k_of(dim, n, d, gamma, as_vector(rho));
    const double got = drifted_principal_eigenvalue(g, gamma, d, rho).eigenvalue;
    CHECK(std::abs(got - want) < 1e-8 * std::max(1.0, std::abs(want)));
    const double want0 = oracle::k_of(dim, n, d, gamma, std::vector<double>(dim, 0.0));
    CHECK(std::abs(principal_eigenpair(g, gamma, d).eigenvalue - want0) < 1e-8);
  }
}

TEST_CASE("separable two-dimensional potential") {
  const Grid g1 = make_cell_grid(1, 24);
  const Grid g2 = make_cell_grid(2, 24);
  Field a(24), b(24), sum(g2.size());
  for (Index i = 0; i < 24; ++i) {
    const double x = g1.coordinate(i, 0);
    a(i) = 0.8 * std::cos(2 * pi * x);
    b(i) = 0.5 + 0.3 * std::sin(2 * pi * x);
  }
  for (Index k = 0; k < g2.size(); ++k) sum(k) = a(g2.axis_index(k, 0)) + b(g2.axis_index(k, 1));
  const double la = principal_eigenpair(g1, a, 1.0).eigenvalue;
  const double lb = principal_eigenpair(g1, b, 1.0).eigenvalue;
  CHECK(std::abs(principal_eigenpair(g2, sum, 1.0).eigenvalue - (la + lb)) < 1e-8);
}

TEST_CASE("shift covariance, monotonicity and reflection symmetry") {
  std::mt19937 rng(5);
  const Grid g = make_cell_grid(1, 64);
  const EigenSettings s;
  for (int trial = 0; trial < 5; ++trial) {
    const Field gamma = random_gamma(g, rng);
    const double base = principal_eigenpair(g, gamma, 1.0).eigenvalue;
    const double c = 0.25 * (trial + 1);
    const Field shifted = (gamma.array() + c).matrix();
    CHECK(std::abs(principal_eigenpair(g, shifted, 1.0).eigenvalue - (base - c)) < 2 * s.tolerance + 1e-10);

    Field bigger = gamma;
    for (Index k = 0; k < g.size(); k += 3) bigger(k) += 0.5;
    CHECK(principal_eigenpair(g, bigger, 1.0).eigenvalue <= base + 2 * s.tolerance);

    const Vec rho = Vec::Constant(1, 0.4 * (trial + 1));
    const double kp = drifted_principal_eigenvalue(g, gamma, 1.0, rho).eigenvalue;
    const double km = drifted_principal_eigenvalue(g, gamma, 1.0, -rho).eigenvalue;
    CHECK(std::abs(kp - km) < 1e-8);
  }
}

TEST_CASE("rayleigh quotient bounds the principal eigenvalue") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const Grid g = make_cell_grid(1, 64);
  const Field gamma = het1_gamma(g);
  const EigenResult r = principal_eigenpair(g, gamma, 1.0);
  CHECK(std::abs(rayleigh_quotient(g, gamma, 1.0, r.eigenfunction) - r.eigenvalue) < 1e-8);
  for (int trial = 0; trial < 20; ++trial) {
    Field phi(64);
    for (auto& v : phi) v = u(rng);
    CHECK(rayleigh_quotient(g, gamma, 1.0, phi) >= r.eigenvalue - 2e-9);
  }
}

TEST_CASE("iteration budget exhaustion is reported") {
  const Grid g = make_cell_grid(1, 64);
  EigenSettings tight;
  tight.max_iterations = 1;
  tight.tolerance = 1e-15;
  tight.residual_tolerance = 1e-15;
  CHECK_THROWS_AS(principal_eigenpair(g, het1_gamma(g), 1.0, tight), EigenSolverError);
}

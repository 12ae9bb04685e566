#include "sirs/coeffs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

double wrap_unit(double x) { return x - std::floor(x); }

struct Evaluator {
  const Vec& x;

  double operator()(const Constant& c) const { return c.value; }

  double operator()(const CosineSeries& s) const {
    double value = s.mean;
    for (const auto& term : s.terms) {
      double arg = term.phase;
      for (Index a = 0; a < x.size() && a < static_cast<Index>(term.frequency.size()); ++a) {
        arg += 2.0 * std::numbers::pi * term.frequency[a] * x(a);
      }
      value += term.amplitude * std::cos(arg);
    }
    return value;
  }

  double operator()(const PiecewiseConstant& p) const {
    const double s = wrap_unit(x(std::min<Index>(p.axis, x.size() - 1)));
    const auto it = std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), s);
    return p.values[static_cast<std::size_t>(it - p.breakpoints.begin())];
  }
};

void check_spec(const CoefficientSpec& spec, std::string_view name, int dimension) {
  if (const auto* s = std::get_if<CosineSeries>(&spec)) {
    for (const auto& t : s->terms) {
      if (static_cast<int>(t.frequency.size()) != dimension) {
        throw ValidationError(fmt::format(
            "{}: cosine term frequency has {} components, expected {}", name,
            t.frequency.size(), dimension));
      }
    }
  } else if (const auto* p = std::get_if<PiecewiseConstant>(&spec)) {
    if (p->values.size() != p->breakpoints.size() + 1) {
      throw ValidationError(
          fmt::format("{}: piecewise constant needs one more value than breakpoints", name));
    }
    for (std::size_t i = 0; i < p->breakpoints.size(); ++i) {
      const double b = p->breakpoints[i];
      if (!(b > 0.0 && b < 1.0) || (i > 0 && !(b > p->breakpoints[i - 1]))) {
        throw ValidationError(fmt::format(
            "{}: breakpoints must be strictly increasing inside (0, 1)", name));
      }
    }
    if (p->axis < 0 || p->axis >= dimension) {
      throw ValidationError(fmt::format("{}: piecewise axis {} out of range", name, p->axis));
    }
  }
}

}  // namespace

double evaluate(const CoefficientSpec& spec, const Vec& x) {
  return std::visit(Evaluator{x}, spec);
}

bool is_constant(const CoefficientSpec& spec) {
  if (std::holds_alternative<Constant>(spec)) return true;
  if (const auto* s = std::get_if<CosineSeries>(&spec)) {
    return std::all_of(s->terms.begin(), s->terms.end(),
                       [](const CosineTerm& t) { return t.amplitude == 0.0; });
  }
  const auto& p = std::get<PiecewiseConstant>(spec);
  return std::adjacent_find(p.values.begin(), p.values.end(), std::not_equal_to<>()) ==
         p.values.end();
}

Field sample_coefficient(const CoefficientSpec& spec, const Grid& grid,
                         std::optional<std::string_view> positive_name) {
  Field out(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    out(k) = evaluate(spec, grid.position(k));
    if (!std::isfinite(out(k))) {
      throw ValidationError(fmt::format("{}: non-finite sample at {}",
                                        positive_name.value_or("coefficient"),
                                        grid.coordinate(k, 0)));
    }
    if (positive_name && !(out(k) > 0.0)) {
      throw ValidationError(fmt::format("{} must be strictly positive; sample {} at x = {}",
                                        *positive_name, out(k), grid.coordinate(k, 0)));
    }
  }
  return out;
}

double Bump::evaluate(const Vec& x) const {
  const double r = (x - center).norm();
  if (r >= radius) return 0.0;
  const double c = std::cos(std::numbers::pi * r / (2.0 * radius));
  return height * c * c;
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.name == b.name && a.dimension == b.dimension && a.d == b.d && a.alpha == b.alpha &&
         a.mu == b.mu && a.lambda == b.lambda && a.S0 == b.S0 && a.I0.center == b.I0.center &&
         a.I0.radius == b.I0.radius && a.I0.height == b.I0.height &&
         a.cell_resolution == b.cell_resolution && a.half_width == b.half_width &&
         a.step == b.step && a.boundary == b.boundary && a.time == b.time && a.tol == b.tol &&
         a.front_threshold == b.front_threshold;
}

void validate(const Scenario& s) {
  if (s.dimension != 1 && s.dimension != 2) {
    throw ValidationError(fmt::format("dimension must be 1 or 2, got {}", s.dimension));
  }
  if (!(s.d > 0.0) || !std::isfinite(s.d)) throw ValidationError("d must be strictly positive");
  if (s.cell_resolution < 16) {
    throw ValidationError(
        fmt::format("cell resolution must be >= 16, got {}", s.cell_resolution));
  }
  check_spec(s.alpha, "alpha", s.dimension);
  check_spec(s.mu, "mu", s.dimension);
  check_spec(s.lambda, "lambda", s.dimension);
  check_spec(s.S0, "S0", s.dimension);

  // Positivity is checked on the cell grid and on a finer one to catch narrow dips.
  for (int res : {s.cell_resolution, 4 * s.cell_resolution}) {
    const Grid g = make_cell_grid(s.dimension, s.dimension == 1 ? res : std::min(res, 256));
    sample_coefficient(s.alpha, g, "alpha");
    sample_coefficient(s.mu, g, "mu");
    sample_coefficient(s.lambda, g, "lambda");
    sample_coefficient(s.S0, g, "S0");
  }

  // Throws on a step that does not divide the period or 2L.
  make_domain_grid(s.dimension, s.half_width, s.step, s.boundary);

  if (s.I0.center.size() != s.dimension) {
    throw ValidationError("I0 center must have one coordinate per dimension");
  }
  if (!(s.I0.height > 0.0)) throw ValidationError("I0 height must be > 0");
  if (!(s.I0.radius > 0.0)) throw ValidationError("I0 radius must be > 0");
  for (int a = 0; a < s.dimension; ++a) {
    if (!(std::abs(s.I0.center(a)) + s.I0.radius < s.half_width)) {
      throw ValidationError("I0 support must lie inside (-L, L)^n");
    }
  }
  if (s.time.dt && !(*s.time.dt > 0.0)) throw ValidationError("time step must be > 0");
  if (!(s.time.final_time > 0.0)) throw ValidationError("final time must be > 0");
  if (!(s.time.snapshot_interval > 0.0) || !(s.time.trace_interval > 0.0)) {
    throw ValidationError("snapshot and trace intervals must be > 0");
  }
  if (s.front_threshold && !(*s.front_threshold > 0.0)) {
    throw ValidationError("front threshold must be > 0");
  }
}

DerivedCoefficients derive(const Scenario& s, std::optional<int> resolution) {
  validate(s);
  DerivedCoefficients c;
  c.grid = make_cell_grid(s.dimension, resolution.value_or(s.cell_resolution));
  c.d = s.d;
  c.tol = s.tol;
  c.alpha = sample_coefficient(s.alpha, c.grid, "alpha");
  c.mu = sample_coefficient(s.mu, c.grid, "mu");
  c.lambda = sample_coefficient(s.lambda, c.grid, "lambda");
  c.s0 = sample_coefficient(s.S0, c.grid, "S0");
  c.M = cell_average(c.s0);
  c.gamma_star = c.alpha * c.M - c.mu;
  c.homogeneous = is_constant(s.alpha) && is_constant(s.mu) && is_constant(s.lambda) &&
                  is_constant(s.S0);
  try {
    c.lambda0 = lambda0(c);
  } catch (const InapplicableError&) {
  }
  try {
    c.c_taz = c_taz_bound(c);
  } catch (const InapplicableError&) {
  }
  return c;
}

double lambda0(const DerivedCoefficients& c) {
  if (!(c.gamma_star.minCoeff() > 0.0)) {
    throw InapplicableError("Lambda0 inapplicable: gamma* not positive");
  }
  const Field ratio = c.gamma_star.cwiseQuotient(c.alpha);
  return c.mu.maxCoeff() * ratio.maxCoeff() / ratio.minCoeff() *
         (c.alpha.maxCoeff() / c.alpha.minCoeff() + 1.0);
}

double c_taz_bound(const DerivedCoefficients& c) {
  const Field ratio = c.gamma_star.cwiseQuotient(c.alpha);
  if (c.homogeneous) {
    if (!(ratio.minCoeff() > 0.0)) {
      throw InapplicableError("contraction bound unavailable: gamma* not positive");
    }
    return c.mu(0) / c.lambda(0);
  }
  const double mu_over_lambda = c.mu.cwiseQuotient(c.lambda).maxCoeff();
  const double margin = ratio.minCoeff() - mu_over_lambda * ratio.maxCoeff();
  if (!(margin > 0.0)) {
    throw InapplicableError(
        "contraction bound unavailable: min(gamma*/alpha) <= max(mu/lambda) max(gamma*/alpha)");
  }
  return c.alpha.maxCoeff() * ratio.maxCoeff() * c.mu.maxCoeff() /
         (c.alpha.minCoeff() * c.lambda.minCoeff() * margin);
}

}  // namespace sirs

#include "sirs/speeds.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <tuple>
#include <limits>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RayObjective {
  const Grid& grid;
  const Field& gamma;
  double d;
  const Vec& e;
  const EigenSettings& eigen;
  Field warm;
  int evaluations = 0;

  // -k(r e)/r together with k.
  std::pair<double, double> operator()(double r) {
    const Vec rho = r * e;
    EigenResult res = drifted_principal_eigenvalue(grid, gamma, d, rho, eigen, &warm);
    ++evaluations;
    warm = std::move(res.eigenfunction);
    return {-res.eigenvalue / r, res.eigenvalue};
  }
};

struct Minimum {
  double r;
  double value;
  double k;
};

Minimum golden_section(RayObjective& f, double a, double b, double rel_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  auto [f1, k1] = f(x1);
  auto [f2, k2] = f(x2);
  while (b - a > rel_tol * 0.5 * (a + b)) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      k2 = k1;
      x1 = b - inv_phi * (b - a);
      std::tie(f1, k1) = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      k1 = k2;
      x2 = a + inv_phi * (b - a);
      std::tie(f2, k2) = f(x2);
    }
  }
  return f1 < f2 ? Minimum{x1, f1, k1} : Minimum{x2, f2, k2};
}

std::string scan_table(const std::vector<ScanRow>& scan) {
  std::string out = "r\tk\t-k/r\n";
  for (const auto& row : scan) {
    out += fmt::format("{:.6g}\t{:.10g}\t{:.10g}{}\n", row.r, row.k, row.value,
                       row.evaluated ? "" : "\t(bound)");
  }
  return out;
}

// Nelder-Mead polytope descent on a 2D objective.
Vec nelder_mead(const std::function<double(const Vec&)>& f, Vec start, double step,
                double rel_tol, int max_iter = 400) {
  std::array<Vec, 3> x = {start, start, start};
  x[1](0) += step;
  x[2](1) += step;
  std::array<double, 3> fx = {f(x[0]), f(x[1]), f(x[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    const double spread = std::abs(fx[worst] - fx[best]);
    const double size = std::max((x[worst] - x[best]).norm(), (x[mid] - x[best]).norm());
    if (spread <= rel_tol * rel_tol * std::abs(fx[best]) &&
        size <= rel_tol * std::max(1.0, x[best].norm())) {
      break;
    }
    const Vec centroid = 0.5 * (x[best] + x[mid]);
    const Vec reflected = centroid + (centroid - x[worst]);
    const double fr = f(reflected);
    if (fr < fx[best]) {
      const Vec expanded = centroid + 2.0 * (centroid - x[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        x[worst] = expanded;
        fx[worst] = fe;
      } else {
        x[worst] = reflected;
        fx[worst] = fr;
      }
    } else if (fr < fx[mid]) {
      x[worst] = reflected;
      fx[worst] = fr;
    } else {
      const Vec contracted = centroid + 0.5 * (x[worst] - centroid);
      const double fc = f(contracted);
      if (fc < fx[worst]) {
        x[worst] = contracted;
        fx[worst] = fc;
      } else {
        for (int i : {mid, worst}) {
          x[i] = x[best] + 0.5 * (x[i] - x[best]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  const auto it = std::min_element(fx.begin(), fx.end());
  return x[static_cast<std::size_t>(it - fx.begin())];
}

}  // namespace

double homogeneous_speed(double d, double gamma_bar) {
  if (!(d > 0.0)) throw ValidationError("homogeneous speed needs d > 0");
  if (!(gamma_bar > 0.0)) throw ValidationError("homogeneous speed needs gamma > 0");
  return 2.0 * std::sqrt(d * gamma_bar);
}

SpeedResult fg_speed(const Grid& grid, const Field& gamma, double d, const Vec& direction,
                     const SpeedSettings& settings) {
  if (direction.size() != grid.dimension) {
    throw ValidationError("direction must have one component per dimension");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-12) throw ValidationError("direction must be a unit vector");
  if (settings.scan_points < 3 || !(settings.r_min > 0.0) || !(settings.r_max > settings.r_min)) {
    throw ValidationError("speed scan needs >= 3 points on 0 < r_min < r_max");
  }

  SpeedResult out;
  out.direction = direction;
  const EigenResult base = principal_eigenpair(grid, gamma, d, settings.eigen);
  out.lambda1 = base.eigenvalue;
  if (base.eigenvalue >= 0.0) {
    throw SolverError(fmt::format(
        "no positive speed: principal eigenvalue non-negative (lambda1 = {})", base.eigenvalue));
  }

  RayObjective f{grid, gamma, d, direction, settings.eigen, base.eigenfunction};
  const double gmin = gamma.minCoeff();
  double best = kInf;
  const int n = settings.scan_points;
  for (int i = 0; i < n; ++i) {
    const double r = settings.r_min *
                     std::pow(settings.r_max / settings.r_min, static_cast<double>(i) / (n - 1));
    ScanRow row;
    row.r = r;
    // Since L_rho 1 = -(d r^2 + gamma), k <= -(d r^2 + min gamma), so -k/r is bounded below
    // by (d r^2 + min gamma)/r; points whose bound exceeds the best value cannot be minima.
    const double lower = (d * r * r + gmin) / r;
    if (lower > best) {
      row.k = std::numeric_limits<double>::quiet_NaN();
      row.value = lower;
    } else {
      std::tie(row.value, row.k) = f(r);
      row.evaluated = true;
      best = std::min(best, row.value);
    }
    out.scan.push_back(row);
  }

  Minimum global{0.0, kInf, 0.0};
  auto value_at = [&](int i) { return out.scan[i].evaluated ? out.scan[i].value : kInf; };
  for (int i = 0; i < n; ++i) {
    if (!out.scan[i].evaluated) continue;
    const double v = out.scan[i].value;
    const bool left_ok = i == 0 || v <= value_at(i - 1);
    const bool right_ok = i == n - 1 || v <= value_at(i + 1);
    if (!(left_ok && right_ok)) continue;
    if (i == 0 || i == n - 1) {
      throw SolverError("speed minimum not bracketed by the r-scan:\n" + scan_table(out.scan));
    }
    ++out.brackets;
    const Minimum m = golden_section(f, out.scan[i - 1].r, out.scan[i + 1].r,
                                     settings.relative_tolerance);
    if (m.value < global.value) global = m;
  }
  if (out.brackets == 0) {
    throw SolverError("speed minimum not bracketed by the r-scan:\n" + scan_table(out.scan));
  }
  out.speed = global.value;
  out.rho = global.r * direction;
  out.k_at_rho = global.k;

  if (settings.full_minimization && grid.dimension == 2) {
    Field warm = f.warm;
    auto objective = [&](const Vec& rho) {
      const double proj = rho.dot(direction);
      if (!(proj > 0.0)) return kInf;
      const EigenResult res = drifted_principal_eigenvalue(grid, gamma, d, rho, settings.eigen, &warm);
      ++f.evaluations;
      warm = res.eigenfunction;
      return -res.eigenvalue / proj;
    };
    const Vec rho = nelder_mead(objective, out.rho, 0.1 * global.r, settings.relative_tolerance);
    const double value = objective(rho);
    if (value < out.speed) {
      const EigenResult res = drifted_principal_eigenvalue(grid, gamma, d, rho, settings.eigen, &warm);
      out.speed = value;
      out.rho = rho;
      out.k_at_rho = res.eigenvalue;
    }
  }
  out.evaluations = f.evaluations;
  return out;
}

SpeedSettings speed_settings(const Tolerances& tol) {
  SpeedSettings s;
  s.relative_tolerance = tol.speed;
  s.eigen = eigen_settings(tol);
  return s;
}

SpeedPair speed_pair(const DerivedCoefficients& c, const Barriers& barriers, const Vec& direction,
                     const SpeedSettings& settings) {
  if (!barriers.assumption1_holds) {
    throw InapplicableError(fmt::format(
        "assumption1 fails: lambda1 = {} >= 0, no spreading speeds", barriers.lambda1));
  }
  SpeedPair pair;
  pair.upper = fg_speed(c.grid, c.gamma_star, c.d, direction, settings);
  const Field reduced = c.gamma_star - c.alpha.cwiseProduct(barriers.R_bar);
  pair.lower = fg_speed(c.grid, reduced, c.d, direction, settings);
  return pair;
}

SpeedPair speed_pair(const Scenario& scenario, const Vec& direction) {
  const DerivedCoefficients c = derive(scenario);
  return speed_pair(c, compute_barriers(c), direction, speed_settings(scenario.tol));
}

}  // namespace sirs

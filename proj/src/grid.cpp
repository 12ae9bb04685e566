#include "sirs/grid.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "sirs/errors.hpp"

namespace sirs {

namespace {

// Returns round(value) if value is an integer up to relative 1e-9, otherwise -1.
long long as_integer(double value) {
  const double r = std::round(value);
  if (std::abs(value - r) > 1e-9 * std::max(1.0, std::abs(value))) return -1;
  return static_cast<long long>(r);
}

}  // namespace

Vec Grid::position(Index flat_index) const {
  Vec x(dimension);
  for (int a = 0; a < dimension; ++a) x(a) = coordinate(flat_index, a);
  return x;
}

Index Grid::neighbour(Index k, int axis, int offset) const {
  const Index i = axis_index(k, axis);
  Index j = i + offset;
  if (j < 0 || j >= points) {
    if (boundary == Boundary::periodic) {
      j = (j + points) % points;
    } else {
      j = i;  // zero-flux ghost equal to the boundary value
    }
  }
  const Index stride = axis == 0 ? 1 : points;
  return k + (j - i) * stride;
}

bool operator==(const Grid& a, const Grid& b) {
  return a.dimension == b.dimension && a.points == b.points && a.spacing == b.spacing &&
         a.origin == b.origin && a.boundary == b.boundary;
}

Grid make_cell_grid(int dimension, int resolution) {
  if (dimension != 1 && dimension != 2) {
    throw ValidationError(fmt::format("dimension must be 1 or 2, got {}", dimension));
  }
  if (resolution < 2) {
    throw ValidationError(fmt::format("cell resolution must be >= 2, got {}", resolution));
  }
  Grid g;
  g.dimension = dimension;
  g.points = resolution;
  g.spacing = 1.0 / resolution;
  g.origin = 0.0;
  g.boundary = Boundary::periodic;
  return g;
}

Grid make_domain_grid(int dimension, double half_width, double step, Boundary boundary) {
  if (dimension != 1 && dimension != 2) {
    throw ValidationError(fmt::format("dimension must be 1 or 2, got {}", dimension));
  }
  if (!(half_width > 0.0) || !(step > 0.0)) {
    throw ValidationError("domain half_width and step must be positive");
  }
  const long long per_period = as_integer(1.0 / step);
  if (per_period <= 0) {
    throw ValidationError(
        fmt::format("domain step {} does not divide the unit period", step));
  }
  const long long n = as_integer(2.0 * half_width / step);
  if (n <= 0) {
    throw ValidationError(
        fmt::format("2L/h = {} is not an integer", 2.0 * half_width / step));
  }
  Grid g;
  g.dimension = dimension;
  g.points = static_cast<Index>(n);
  g.spacing = 1.0 / static_cast<double>(per_period);
  g.origin = -half_width;
  g.boundary = boundary;
  return g;
}

double recommended_half_width(double speed_estimate, double final_time, double bump_radius) {
  return (speed_estimate + 1.0) * final_time + bump_radius + 5.0;
}

double dirichlet_energy(const Grid& grid, const Field& u) {
  double acc = 0.0;
  const double inv_h = 1.0 / grid.spacing;
  for (Index k = 0; k < u.size(); ++k) {
    for (int axis = 0; axis < grid.dimension; ++axis) {
      if (grid.boundary == Boundary::neumann && grid.axis_index(k, axis) == grid.points - 1) {
        continue;
      }
      const double diff = (u(grid.neighbour(k, axis, +1)) - u(k)) * inv_h;
      acc += diff * diff;
    }
  }
  return acc * grid.cell_volume();
}

Eigen::SparseMatrix<double> assemble(const Grid& grid, const StencilOperator& op) {
  const Index n = grid.size();
  const double h = grid.spacing;
  const double off = op.diffusion / (h * h);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (1 + 2 * grid.dimension));
  for (Index k = 0; k < n; ++k) {
    double centre = op.diag.size() ? op.diag(k) : 0.0;
    for (int axis = 0; axis < grid.dimension; ++axis) {
      const double b = op.drift.size() ? op.drift(axis) : 0.0;
      const Index up = grid.neighbour(k, axis, +1);
      const Index down = grid.neighbour(k, axis, -1);
      centre += 2.0 * off;
      entries.emplace_back(k, up, -off + b / (2.0 * h));
      entries.emplace_back(k, down, -off - b / (2.0 * h));
    }
    entries.emplace_back(k, k, centre);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());  // duplicates are summed
  m.makeCompressed();
  return m;
}

Field apply(const Grid& grid, const StencilOperator& op, const Field& u) {
  Field out = -op.diffusion * laplacian(grid, u);
  if (op.drift.size()) out += gradient_dot(grid, op.drift, u);
  if (op.diag.size()) out += op.diag.cwiseProduct(u);
  return out;
}

void write_snapshot(std::ostream& os, const Grid& grid, const std::vector<NamedField>& fields) {
  static constexpr const char* axis_names[] = {"x", "y"};
  for (int a = 0; a < grid.dimension; ++a) os << (a ? "\t" : "") << axis_names[a];
  for (const auto& f : fields) os << '\t' << f.name;
  os << '\n';
  for (Index k = 0; k < grid.size(); ++k) {
    for (int a = 0; a < grid.dimension; ++a) {
      os << (a ? "\t" : "") << fmt::format("{}", grid.coordinate(k, a));
    }
    for (const auto& f : fields) os << '\t' << fmt::format("{}", (*f.values)(k));
    os << '\n';
  }
}

}  // namespace sirs

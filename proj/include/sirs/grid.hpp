#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace sirs {

template <typename Scalar>
using FieldT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Field = FieldT<double>;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Boundary { periodic, neumann };

// Uniform tensor grid in one or two dimensions, same spacing on every axis.
// Points are origin + i*spacing, i = 0..points-1; the flat index runs with the
// first axis fastest.
struct Grid {
  int dimension = 1;
  Index points = 0;
  double spacing = 1.0;
  double origin = 0.0;
  Boundary boundary = Boundary::periodic;

  Index size() const { return dimension == 1 ? points : points * points; }
  Index flat(Index i, Index j = 0) const { return i + points * j; }
  Index axis_index(Index flat_index, int axis) const {
    return axis == 0 ? flat_index % points : flat_index / points;
  }
  double coordinate(Index flat_index, int axis) const {
    return origin + spacing * static_cast<double>(axis_index(flat_index, axis));
  }
  Vec position(Index flat_index) const;
  /// Volume element h^n used by quadrature.
  double cell_volume() const { return std::pow(spacing, dimension); }
  /// Neighbour of `i` along `axis` shifted by `offset` (+1/-1); wraps for periodic
  /// grids and reflects onto the boundary point for Neumann grids.
  Index neighbour(Index flat_index, int axis, int offset) const;
};

bool operator==(const Grid& a, const Grid& b);

/// Periodicity cell [0,1)^n with `resolution` samples per axis. Throws ValidationError
/// for resolution < 2 or a dimension outside {1, 2}.
Grid make_cell_grid(int dimension, int resolution);

/// Truncated evolution box [-L, L)^n with step h. Requires 2L/h and 1/h integral.
Grid make_domain_grid(int dimension, double half_width, double step,
                      Boundary boundary = Boundary::periodic);

/// Half-width large enough that a front moving at `speed_estimate` stays clear of the
/// boundary until `final_time`.
double recommended_half_width(double speed_estimate, double final_time, double bump_radius);

// ---------------------------------------------------------------------------
// Stencil application. Second-order centred differences.

template <typename Derived>
FieldT<typename Derived::Scalar> laplacian(const Grid& grid,
                                           const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  FieldT<Scalar> out(u.size());
  const Scalar inv_h2 = Scalar(1) / Scalar(grid.spacing * grid.spacing);
  for (Index k = 0; k < u.size(); ++k) {
    Scalar acc(0);
    for (int axis = 0; axis < grid.dimension; ++axis) {
      acc += u(grid.neighbour(k, axis, +1)) + u(grid.neighbour(k, axis, -1)) - Scalar(2) * u(k);
    }
    out(k) = acc * inv_h2;
  }
  return out;
}

/// Centred approximation of rho . grad u.
template <typename Derived>
FieldT<typename Derived::Scalar> gradient_dot(const Grid& grid, const Vec& rho,
                                              const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  FieldT<Scalar> out = FieldT<Scalar>::Zero(u.size());
  const Scalar inv_2h = Scalar(1) / Scalar(2 * grid.spacing);
  for (int axis = 0; axis < grid.dimension; ++axis) {
    if (rho(axis) == 0.0) continue;
    for (Index k = 0; k < u.size(); ++k) {
      out(k) += Scalar(rho(axis)) *
                (u(grid.neighbour(k, axis, +1)) - u(grid.neighbour(k, axis, -1))) * inv_2h;
    }
  }
  return out;
}

/// Mean of the samples; on a periodic cell this is the trapezoidal average.
template <typename Derived>
typename Derived::Scalar cell_average(const Eigen::MatrixBase<Derived>& u) {
  return u.mean();
}

template <typename Derived>
typename Derived::Scalar l2_norm(const Grid& grid, const Eigen::MatrixBase<Derived>& u) {
  using std::sqrt;
  return sqrt(typename Derived::Scalar(grid.cell_volume()) * u.squaredNorm());
}

template <typename Derived>
typename Derived::Scalar sup_norm(const Eigen::MatrixBase<Derived>& u) {
  return u.size() == 0 ? typename Derived::Scalar(0) : u.cwiseAbs().maxCoeff();
}

/// Sum of squared forward differences, sum_k |D+ u|^2 h^n. Equals -<u, laplacian(u)>
/// on a periodic grid, so it pairs exactly with `laplacian`.
double dirichlet_energy(const Grid& grid, const Field& u);

// ---------------------------------------------------------------------------
// Assembled operator  -diffusion * Lap + drift . grad + diag(x).

struct StencilOperator {
  double diffusion = 0.0;
  Vec drift;   // may be empty, meaning zero
  Field diag;  // may be empty, meaning zero
};

Eigen::SparseMatrix<double> assemble(const Grid& grid, const StencilOperator& op);
Field apply(const Grid& grid, const StencilOperator& op, const Field& u);

// ---------------------------------------------------------------------------
// Snapshot export: header row, then one row per grid point in flat-index order with
// the coordinates followed by each named field.

struct NamedField {
  std::string name;
  const Field* values;
};

void write_snapshot(std::ostream& os, const Grid& grid, const std::vector<NamedField>& fields);

}  // namespace sirs

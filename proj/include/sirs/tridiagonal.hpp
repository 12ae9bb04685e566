#pragma once

#include <Eigen/Core>

#include <cassert>
#include <vector>

#include "sirs/errors.hpp"

namespace sirs {

// Factored tridiagonal system with constant off-diagonals, optionally closed into a
// cycle (periodic wrap). The cyclic case uses the Sherman-Morrison correction on top
// of the Thomas algorithm; the matrix must be diagonally dominant.
//
//   lower * x[i-1] + diag[i] * x[i] + upper * x[i+1] = rhs[i]
template <typename Scalar>
class TridiagonalSolver {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  TridiagonalSolver() = default;

  TridiagonalSolver(Scalar lower, Vector diag, Scalar upper, bool cyclic)
      : lower_(lower), upper_(upper), cyclic_(cyclic) {
    const Eigen::Index n = diag.size();
    if (n < 3) throw ValidationError("tridiagonal system needs at least three rows");
    diag_ = std::move(diag);
    if (cyclic_) {
      // A = B + u v^T with u = (gamma, 0, .., 0, upper), v = (1, 0, .., 0, lower / gamma).
      gamma_ = -diag_(0);
      Vector modified = diag_;
      modified(0) -= gamma_;
      modified(n - 1) -= lower_ * upper_ / gamma_;
      factor(modified);
      Vector u = Vector::Zero(n);
      u(0) = gamma_;
      u(n - 1) = upper_;
      z_ = u;
      substitute(z_);
    } else {
      factor(diag_);
    }
  }

  Eigen::Index size() const { return diag_.size(); }

  /// Solves in place.
  template <typename Derived>
  void solve_in_place(Eigen::MatrixBase<Derived>& x) const {
    assert(x.size() == diag_.size());
    substitute(x);
    if (cyclic_) {
      const Eigen::Index n = x.size();
      const Scalar vy = x(0) + lower_ / gamma_ * x(n - 1);
      const Scalar vz = z_(0) + lower_ / gamma_ * z_(n - 1);
      const Scalar factor = vy / (Scalar(1) + vz);
      x -= factor * z_;
    }
  }

  Vector solve(const Vector& rhs) const {
    Vector x = rhs;
    solve_in_place(x);
    return x;
  }

 private:
  void factor(const Vector& d) {
    const Eigen::Index n = d.size();
    scaled_upper_.resize(n);
    pivot_.resize(n);
    pivot_(0) = d(0);
    scaled_upper_(0) = upper_ / pivot_(0);
    for (Eigen::Index i = 1; i < n; ++i) {
      pivot_(i) = d(i) - lower_ * scaled_upper_(i - 1);
      if (pivot_(i) == Scalar(0)) throw SolverError("zero pivot in tridiagonal solve");
      scaled_upper_(i) = upper_ / pivot_(i);
    }
  }

  // Forward elimination and back substitution on the non-cyclic factor.
  template <typename Derived>
  void substitute(Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = x.size();
    x(0) /= pivot_(0);
    for (Eigen::Index i = 1; i < n; ++i) x(i) = (x(i) - lower_ * x(i - 1)) / pivot_(i);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= scaled_upper_(i) * x(i + 1);
  }

  Scalar lower_{0};
  Scalar upper_{0};
  bool cyclic_ = false;
  Scalar gamma_{0};
  Vector diag_;
  Vector pivot_;
  Vector scaled_upper_;
  Vector z_;
};

}  // namespace sirs

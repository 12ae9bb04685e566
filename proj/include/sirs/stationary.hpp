#pragma once

#include <Eigen/SparseLU>

#include <memory>
#include <string>
#include <vector>

#include "sirs/coeffs.hpp"
#include "sirs/principal_eigen.hpp"

namespace sirs {

EigenSettings eigen_settings(const Tolerances& tol);

// The three maps whose composition T o A o Z has the endemic stationary state as its
// fixed point:
//   Z(I) = R   with  -d Lap R + lambda R = mu I
//   A(R) = gamma*/alpha - R
//   T(V) = largest periodic solution of -d Lap I = alpha V I - alpha I^2
//          (zero when the principal eigenvalue of -d Lap - alpha V is >= 0)
class StationaryOperators {
 public:
  explicit StationaryOperators(const DerivedCoefficients& coeffs);

  const DerivedCoefficients& coefficients() const { return coeffs_; }

  Field Z(const Field& I) const;
  Field A(const Field& R) const;
  Field T(const Field& V) const;
  Field taz(const Field& I) const { return T(A(Z(I))); }

  /// Principal eigenvalue of -d Lap - alpha V; T(V) is non-zero iff it is negative.
  double threshold_eigenvalue(const Field& V) const;

 private:
  DerivedCoefficients coeffs_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> z_solver_;
};

Field op_Z(const Field& I, const DerivedCoefficients& coeffs);
Field op_A(const Field& R, const DerivedCoefficients& coeffs);
Field op_T(const Field& V, const DerivedCoefficients& coeffs);

struct Barriers {
  Field I_bar;    // T(gamma*/alpha)
  Field R_bar;    // Z(I_bar)
  Field I_under;  // T(A(Z(I_bar)))
  double lambda1 = 0.0;              // of -d Lap - gamma*
  double lambda1_reduced = 0.0;      // of -d Lap - (gamma* - alpha R_bar)
  bool assumption1_holds = false;    // lambda1 < 0
  bool assumption2_holds = false;    // lambda1_reduced < 0
};

Barriers compute_barriers(const StationaryOperators& ops);
inline Barriers compute_barriers(const DerivedCoefficients& coeffs) {
  return compute_barriers(StationaryOperators(coeffs));
}

/// True iff I_under - slack <= I <= I_bar + slack pointwise.
bool invariant_set_check(const Field& I, const Barriers& barriers, double slack = 1e-7);

struct StationaryState {
  Field S_star, I_star, R_star;
  double residual_S = 0.0, residual_I = 0.0, residual_R = 0.0;  // sup norms
  int iterations = 0;
  double contraction_estimate = 0.0;  // largest ratio of successive L2 increments
  std::vector<double> increments;
  bool lambda_above_lambda0 = false;
  bool barrier_contact = false;
  std::vector<std::string> warnings;
};

/// Iterates I <- T(A(Z(I))) from I_bar until the cell L2 increment drops below the
/// fixed-point tolerance, then sets R* = Z(I*), S* = M - I* - R*.
/// Throws InapplicableError if gamma* gives lambda1 >= 0, SolverError on a stalled
/// iteration or a non-positive S*.
StationaryState fixed_point(const StationaryOperators& ops, const Barriers& barriers);
StationaryState fixed_point(const DerivedCoefficients& coeffs);

/// Sup norms of the three stationary equations of the full system at (S, I, R).
struct StationaryResiduals {
  double S, I, R;
};
StationaryResiduals stationary_residuals(const DerivedCoefficients& coeffs, const Field& S,
                                         const Field& I, const Field& R);

}  // namespace sirs

#pragma once

#include <optional>

#include "sirs/errors.hpp"
#include "sirs/grid.hpp"

namespace sirs {

struct EigenSettings {
  double tolerance = 1e-9;           // successive eigenvalue estimates
  double residual_tolerance = 1e-7;  // sup |(L - k) phi|, sup phi = 1
  int max_iterations = 10000;
};

/// Principal eigenpair of a periodic cell operator.
struct EigenResult {
  double eigenvalue = 0.0;
  Field eigenfunction;  // strictly positive, sup = 1
  double residual = 0.0;
  int iterations = 0;
};

class EigenSolverError : public SolverError {
 public:
  EigenSolverError(const std::string& what, double last_estimate, double last_residual)
      : SolverError(what), last_estimate(last_estimate), last_residual(last_residual) {}
  double last_estimate;
  double last_residual;
};

/// L_rho psi = -d Lap psi + 2 d rho . grad psi - (d |rho|^2 + gamma) psi, matrix-free.
Field apply_drifted_operator(const Grid& grid, const Field& gamma, double d, const Vec& rho,
                             const Field& psi);

/// Smallest eigenvalue of -d Lap - gamma with its positive eigenfunction.
EigenResult principal_eigenpair(const Grid& grid, const Field& gamma, double d,
                                const EigenSettings& settings = {},
                                const Field* warm_start = nullptr);

/// Principal eigenvalue k(rho) of the drifted operator L_rho.
EigenResult drifted_principal_eigenvalue(const Grid& grid, const Field& gamma, double d,
                                         const Vec& rho, const EigenSettings& settings = {},
                                         const Field* warm_start = nullptr);

/// (int d |grad phi|^2 - gamma phi^2) / int phi^2 with forward differences, which makes it
/// the exact Rayleigh quotient of the discrete operator. Throws ValidationError for phi = 0.
double rayleigh_quotient(const Grid& grid, const Field& gamma, double d, const Field& phi);

}  // namespace sirs

#include "sirs/principal_eigen.hpp"

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include <cmath>

namespace sirs {

Field apply_drifted_operator(const Grid& grid, const Field& gamma, double d, const Vec& rho,
                             const Field& psi) {
  Field out = -d * laplacian(grid, psi) - (d * rho.squaredNorm() + gamma.array()).matrix().cwiseProduct(psi);
  if (rho.squaredNorm() > 0.0) out += 2.0 * d * gradient_dot(grid, rho, psi);
  return out;
}

// Power iteration on the resolvent (L - sigma)^{-1}, sigma strictly below every
// eigenvalue of L. Because L_rho(1) = -(d|rho|^2 + gamma), the principal eigenvalue is at
// least -(d|rho|^2 + sup gamma); shifting further down by `gap` keeps (L - sigma) an
// M-matrix whose inverse is positivity-improving. Its dominant eigenvalue
// 1/(k - sigma) belongs to the positive eigenfunction, and the convergence factor
// (k - sigma)/(k2 - sigma) does not depend on rho since the drift cancels in the shift.
EigenResult drifted_principal_eigenvalue(const Grid& grid, const Field& gamma, double d,
                                         const Vec& rho, const EigenSettings& settings,
                                         const Field* warm_start) {
  if (!(d > 0.0)) throw ValidationError("diffusion must be positive");
  if (gamma.size() != grid.size()) throw ValidationError("gamma does not match the grid");
  if (grid.boundary != Boundary::periodic) {
    throw ValidationError("principal periodic eigenvalue needs a periodic cell grid");
  }
  if (!gamma.allFinite()) throw ValidationError("gamma must be finite");

  const double drift2 = d * rho.squaredNorm();
  const double oscillation = gamma.maxCoeff() - gamma.minCoeff();
  const double gap = 0.1 * (1.0 + oscillation);
  const double sigma = -(drift2 + gamma.maxCoeff()) - gap;

  StencilOperator op;
  op.diffusion = d;
  op.drift = 2.0 * d * rho;
  op.diag = (-(drift2 + gamma.array()) - sigma).matrix();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(assemble(grid, op));
  if (lu.info() != Eigen::Success) throw SolverError("shifted operator factorisation failed");

  Field u = (warm_start && warm_start->size() == grid.size() && warm_start->minCoeff() > 0.0)
                ? *warm_start
                : Field::Ones(grid.size());
  u /= u.maxCoeff();

  double estimate = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= settings.max_iterations; ++it) {
    Field v = lu.solve(u);
    // Orient the iterate by its mean; the Perron vector has one sign.
    if (v.sum() < 0.0) v = -v;
    const double growth = v.sum() / u.sum();
    const double next = sigma + 1.0 / growth;
    u = v / v.maxCoeff();

    const double increment = std::abs(next - estimate);
    estimate = next;
    if (increment < settings.tolerance) {
      residual = sup_norm(apply_drifted_operator(grid, gamma, d, rho, u) - estimate * u);
      if (residual < settings.residual_tolerance) {
        if (!(u.minCoeff() > 0.0)) {
          throw EigenSolverError(
              fmt::format("principal eigenfunction not positive (min {}); grid too coarse for "
                          "drift |rho| = {}",
                          u.minCoeff(), rho.norm()),
              estimate, residual);
        }
        return EigenResult{estimate, std::move(u), residual, it};
      }
    }
  }
  residual = sup_norm(apply_drifted_operator(grid, gamma, d, rho, u) - estimate * u);
  throw EigenSolverError(
      fmt::format("principal eigenvalue did not converge in {} iterations (estimate {}, "
                  "residual {})",
                  settings.max_iterations, estimate, residual),
      estimate, residual);
}

EigenResult principal_eigenpair(const Grid& grid, const Field& gamma, double d,
                                const EigenSettings& settings, const Field* warm_start) {
  return drifted_principal_eigenvalue(grid, gamma, d, Vec::Zero(grid.dimension), settings,
                                      warm_start);
}

double rayleigh_quotient(const Grid& grid, const Field& gamma, double d, const Field& phi) {
  const double mass = phi.squaredNorm() * grid.cell_volume();
  if (!(mass > 0.0)) throw ValidationError("Rayleigh quotient of the zero function");
  const double potential = (gamma.array() * phi.array().square()).sum() * grid.cell_volume();
  return (d * dirichlet_energy(grid, phi) - potential) / mass;
}

}  // namespace sirs

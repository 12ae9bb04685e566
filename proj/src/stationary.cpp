#include "sirs/stationary.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>

#include "sirs/errors.hpp"

namespace sirs {

EigenSettings eigen_settings(const Tolerances& tol) {
  EigenSettings s;
  s.tolerance = tol.eigen;
  s.residual_tolerance = tol.eigen_residual;
  s.max_iterations = tol.eigen_max_iterations;
  return s;
}

StationaryOperators::StationaryOperators(const DerivedCoefficients& coeffs) : coeffs_(coeffs) {
  StencilOperator op;
  op.diffusion = coeffs_.d;
  op.diag = coeffs_.lambda;
  z_solver_.compute(assemble(coeffs_.grid, op));
  if (z_solver_.info() != Eigen::Success) throw SolverError("Z operator factorisation failed");
}

Field StationaryOperators::Z(const Field& I) const {
  const Field rhs = coeffs_.mu.cwiseProduct(I);
  Field R = z_solver_.solve(rhs);
  StencilOperator op;
  op.diffusion = coeffs_.d;
  op.diag = coeffs_.lambda;
  const double residual = sup_norm(apply(coeffs_.grid, op, R) - rhs);
  if (!(residual <= 1e-9 * std::max(1.0, sup_norm(rhs)))) {
    throw SolverError(fmt::format("Z solve residual {} above tolerance", residual));
  }
  return R;
}

Field StationaryOperators::A(const Field& R) const {
  return coeffs_.gamma_star.cwiseQuotient(coeffs_.alpha) - R;
}

double StationaryOperators::threshold_eigenvalue(const Field& V) const {
  return principal_eigenpair(coeffs_.grid, coeffs_.alpha.cwiseProduct(V), coeffs_.d,
                             eigen_settings(coeffs_.tol))
      .eigenvalue;
}

// Monotone relaxation of  u_t = d Lap u + alpha u (V - u)  from the constant supersolution
// max(sup V, 0) + 1. Implicit diffusion, explicit reaction; the trajectory decreases to the
// largest stationary solution of the scheme, which is the largest discrete solution.
Field StationaryOperators::T(const Field& V) const {
  const Grid& grid = coeffs_.grid;
  if (threshold_eigenvalue(V) >= 0.0) return Field::Zero(grid.size());

  const Field aV = coeffs_.alpha.cwiseProduct(V);
  const double dt_bound = 0.2 / (1.0 + sup_norm(aV));
  const int steps_per_unit = static_cast<int>(std::ceil(1.0 / dt_bound));
  const double dt = 1.0 / steps_per_unit;

  StencilOperator op;
  op.diffusion = dt * coeffs_.d;
  op.diag = Field::Ones(grid.size());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(assemble(grid, op));
  if (lu.info() != Eigen::Success) throw SolverError("relaxation factorisation failed");

  Field u = Field::Constant(grid.size(), std::max(V.maxCoeff(), 0.0) + 1.0);
  double change = std::numeric_limits<double>::infinity();
  double last_change = change;
  for (double t = 0.0; t < coeffs_.tol.stationary_max_time; t += 1.0) {
    const Field before = u;
    for (int s = 0; s < steps_per_unit; ++s) {
      const Field rhs = u + dt * coeffs_.alpha.cwiseProduct(u).cwiseProduct(V - u);
      u = lu.solve(rhs);
    }
    last_change = change;
    change = sup_norm(u - before);
    if (change < coeffs_.tol.stationary) return u;
  }
  throw SolverError(fmt::format(
      "T relaxation did not settle within t = {}: last unit-time change {}, previous {} "
      "(decay factor {})",
      coeffs_.tol.stationary_max_time, change, last_change, change / last_change));
}

Field op_Z(const Field& I, const DerivedCoefficients& coeffs) {
  return StationaryOperators(coeffs).Z(I);
}
Field op_A(const Field& R, const DerivedCoefficients& coeffs) {
  return coeffs.gamma_star.cwiseQuotient(coeffs.alpha) - R;
}
Field op_T(const Field& V, const DerivedCoefficients& coeffs) {
  return StationaryOperators(coeffs).T(V);
}

Barriers compute_barriers(const StationaryOperators& ops) {
  const auto& c = ops.coefficients();
  Barriers b;
  const Field ratio = c.gamma_star.cwiseQuotient(c.alpha);
  b.lambda1 = ops.threshold_eigenvalue(ratio);
  b.assumption1_holds = b.lambda1 < 0.0;
  b.I_bar = ops.T(ratio);
  b.R_bar = ops.Z(b.I_bar);
  const Field reduced = ops.A(b.R_bar);
  b.lambda1_reduced = ops.threshold_eigenvalue(reduced);
  b.assumption2_holds = b.lambda1_reduced < 0.0;
  b.I_under = ops.T(reduced);
  return b;
}

bool invariant_set_check(const Field& I, const Barriers& barriers, double slack) {
  return ((I - barriers.I_under).array() >= -slack).all() &&
         ((barriers.I_bar - I).array() >= -slack).all();
}

StationaryResiduals stationary_residuals(const DerivedCoefficients& c, const Field& S,
                                         const Field& I, const Field& R) {
  const Grid& g = c.grid;
  const Field infection = c.alpha.cwiseProduct(S).cwiseProduct(I);
  const Field recovery = c.mu.cwiseProduct(I);
  const Field waning = c.lambda.cwiseProduct(R);
  return {sup_norm(-c.d * laplacian(g, S) + infection - waning),
          sup_norm(-c.d * laplacian(g, I) - infection + recovery),
          sup_norm(-c.d * laplacian(g, R) - recovery + waning)};
}

StationaryState fixed_point(const StationaryOperators& ops, const Barriers& barriers) {
  const auto& c = ops.coefficients();
  if (!barriers.assumption1_holds) {
    throw InapplicableError(fmt::format(
        "assumption1 fails: lambda1 = {} >= 0, disease-free regime", barriers.lambda1));
  }
  StationaryState st;
  if (c.lambda0) {
    st.lambda_above_lambda0 = c.lambda.minCoeff() > *c.lambda0;
    if (!st.lambda_above_lambda0) {
      st.warnings.push_back(fmt::format(
          "min lambda = {} <= Lambda0 = {}: contraction not guaranteed", c.lambda.minCoeff(),
          *c.lambda0));
    }
  } else {
    st.warnings.push_back("Lambda0 inapplicable: gamma* not positive");
  }
  if (!barriers.assumption2_holds) {
    st.warnings.push_back("assumption2 fails: the lower barrier vanishes");
  }

  // Ratios are only meaningful while increments sit well above the T relaxation noise.
  const double ratio_floor = 1e3 * c.tol.stationary;
  Field I = barriers.I_bar;
  bool converged = false;
  for (int n = 1; n <= c.tol.fixed_point_max_iterations; ++n) {
    Field next = ops.taz(I);
    const double increment = l2_norm(c.grid, next - I);
    if (!std::isfinite(increment)) throw SolverError("fixed-point iterate became non-finite");
    if (!st.increments.empty() && st.increments.back() > ratio_floor) {
      st.contraction_estimate =
          std::max(st.contraction_estimate, increment / st.increments.back());
    }
    st.increments.push_back(increment);
    I = std::move(next);
    st.iterations = n;
    if (increment < c.tol.fixed_point) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::vector<std::string> tail;
    const std::size_t from = st.increments.size() > 8 ? st.increments.size() - 8 : 0;
    for (std::size_t i = from; i < st.increments.size(); ++i) {
      tail.push_back(fmt::format("{:.3e}", st.increments[i]));
    }
    throw SolverError(fmt::format(
        "fixed-point iteration not Cauchy after {} iterations; last increments [{}]",
        st.iterations, fmt::join(tail, ", ")));
  }

  st.I_star = std::move(I);
  st.R_star = ops.Z(st.I_star);
  st.S_star = (Field::Constant(c.grid.size(), c.M) - st.I_star - st.R_star).eval();
  if (!(st.S_star.minCoeff() > 0.0)) {
    throw SolverError(fmt::format("positivity violation: min S* = {}", st.S_star.minCoeff()));
  }
  const auto res = stationary_residuals(c, st.S_star, st.I_star, st.R_star);
  st.residual_S = res.S;
  st.residual_I = res.I;
  st.residual_R = res.R;
  const double slack = c.tol.barrier_slack;
  st.barrier_contact = ((st.I_star - barriers.I_under).array().abs() < slack).any() ||
                       ((barriers.I_bar - st.I_star).array().abs() < slack).any();
  if (st.barrier_contact) st.warnings.push_back("fixed point touches a barrier");
  return st;
}

StationaryState fixed_point(const DerivedCoefficients& coeffs) {
  const StationaryOperators ops(coeffs);
  return fixed_point(ops, compute_barriers(ops));
}

}  // namespace sirs

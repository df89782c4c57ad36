#pragma once

#include <Eigen/Dense>

namespace driftlab {

struct ConstrainedLsResult {
  Eigen::VectorXd coeffs;
  double radius_sq = 0.0;
  double multiplier = 0.0;       // ridge parameter lambda at the solution
  bool constraint_active = false;
};

// Least squares over the l2 ball: minimize |responses - design a|^2 subject
// to |a|^2 <= radius_sq. Strategy: minimum-norm unconstrained solution via
// eigendecomposition of design^T design (eigenvalues below 1e-12 lambda_max
// treated as null directions); if it violates the ball, bisect the ridge
// parameter lambda until |a(lambda)|^2 = radius_sq within 1e-10 relative,
// with (design^T design + lambda I) a = design^T responses.
ConstrainedLsResult constrained_ls(const Eigen::MatrixXd& design,
                                   const Eigen::VectorXd& responses, double radius_sq);

// Same solver on precomputed normal equations (gram = B^T B, rhs = B^T z).
ConstrainedLsResult constrained_ls_normal(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                          double radius_sq);

}  // namespace driftlab

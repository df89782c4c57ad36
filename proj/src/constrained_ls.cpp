#include "driftlab/constrained_ls.hpp"

#include <cmath>

#include "driftlab/errors.hpp"

namespace driftlab {

namespace {

double norm_sq_on_ridge_path(const Eigen::VectorXd& eigenvalues,
                             const Eigen::VectorXd& rotated_rhs, double lambda) {
  double total = 0.0;
  for (long i = 0; i < eigenvalues.size(); ++i) {
    const double denom = eigenvalues[i] + lambda;
    if (denom <= 0.0) continue;
    const double c = rotated_rhs[i] / denom;
    total += c * c;
  }
  return total;
}

}  // namespace

ConstrainedLsResult constrained_ls_normal(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                          double radius_sq) {
  if (radius_sq < 0.0) throw ConfigError("constrained_ls: radius_sq must be >= 0");
  if (!rhs.allFinite() || !gram.allFinite())
    throw ConfigError("constrained_ls: non-finite inputs");
  const long dim = gram.rows();
  if (gram.cols() != dim || rhs.size() != dim)
    throw ConfigError("constrained_ls: dimension mismatch");

  ConstrainedLsResult result;
  result.radius_sq = radius_sq;
  if (radius_sq == 0.0) {
    result.coeffs = Eigen::VectorXd::Zero(dim);
    result.constraint_active = true;
    return result;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const Eigen::VectorXd eigenvalues = solver.eigenvalues();
  const Eigen::MatrixXd basis = solver.eigenvectors();
  const Eigen::VectorXd rotated = basis.transpose() * rhs;

  const double lambda_max = std::max(eigenvalues.maxCoeff(), 0.0);
  const double threshold = 1e-12 * std::max(lambda_max, 1e-300);

  // minimum-norm unconstrained solution
  Eigen::VectorXd unconstrained = Eigen::VectorXd::Zero(dim);
  double norm_sq = 0.0;
  for (long i = 0; i < dim; ++i) {
    if (eigenvalues[i] > threshold) {
      unconstrained[i] = rotated[i] / eigenvalues[i];
      norm_sq += unconstrained[i] * unconstrained[i];
    }
  }
  if (norm_sq <= radius_sq) {
    result.coeffs = basis * unconstrained;
    result.multiplier = 0.0;
    result.constraint_active = false;
    return result;
  }

  // |a(lambda)|^2 is strictly decreasing in lambda; bracket then bisect.
  double lo = 0.0;
  double hi = std::max(lambda_max, 1.0);
  while (norm_sq_on_ridge_path(eigenvalues, rotated, hi) > radius_sq) hi *= 2.0;
  double lambda = hi;
  for (int iter = 0; iter < 400; ++iter) {
    lambda = 0.5 * (lo + hi);
    const double current = norm_sq_on_ridge_path(eigenvalues, rotated, lambda);
    if (std::abs(current - radius_sq) <= 1e-10 * radius_sq) break;
    if (current > radius_sq)
      lo = lambda;
    else
      hi = lambda;
  }

  Eigen::VectorXd shrunk(dim);
  for (long i = 0; i < dim; ++i) shrunk[i] = rotated[i] / (eigenvalues[i] + lambda);
  result.coeffs = basis * shrunk;
  result.multiplier = lambda;
  result.constraint_active = true;
  return result;
}

ConstrainedLsResult constrained_ls(const Eigen::MatrixXd& design,
                                   const Eigen::VectorXd& responses, double radius_sq) {
  if (design.rows() != responses.size())
    throw ConfigError("constrained_ls: rows(design) != length(responses)");
  if (design.rows() < 1) throw ConfigError("constrained_ls: empty design");
  if (!responses.allFinite()) throw ConfigError("constrained_ls: non-finite responses");
  return constrained_ls_normal(design.transpose() * design, design.transpose() * responses,
                               radius_sq);
}

}  // namespace driftlab

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "driftlab/path.hpp"

namespace driftlab {

// Clamped B-spline space of degree M on [-A, A] with K equal interior
// intervals. Knots carry M+1 repeats at each end; basis dimension is K + M.
// The paper-style basis index l in [-M, K-1] maps to the internal index
// l + M in 0..K+M-1; all interfaces use internal indices.
struct SplineSpec {
  double half_width = 1.0;  // A
  int interior = 1;         // K
  int degree = 1;           // M
  std::vector<double> knots;

  int dim() const { return interior + degree; }
  double spacing() const { return 2.0 * half_width / interior; }

  static SplineSpec make(double half_width, int interior, int degree);
};

// Nonzero basis values at a point: values[0..count-1] belong to basis
// functions first..first+count-1. count = 0 outside [-A, A]; at most
// degree+1 functions are active anywhere.
struct ActiveBasis {
  int first = 0;
  int count = 0;
  std::vector<double> values;
  std::vector<double> left;
  std::vector<double> right;
};

// Cox-de Boor recursion with the 0/0 = 0 convention at repeated knots; the
// right endpoint x = A is assigned to the last interval so the basis still
// sums to 1 there.
void eval_basis_active(const SplineSpec& spec, double x, ActiveBasis& out);

// Full-length basis vector (B_0(x), ..., B_{K+M-1}(x)).
std::vector<double> eval_basis(const SplineSpec& spec, double x);

// Row r holds the basis evaluated at xs[r].
Eigen::MatrixXd design_matrix(const SplineSpec& spec, std::span<const double> xs);

// Empirical Gram matrix (1/(N_sel n)) sum_j sum_{k=0}^{n-1} B(x_jk) B(x_jk)^T
// over the sample points of the selected paths (all paths, or one class).
// Throws EmptySelection if no path survives the filter.
Eigen::MatrixXd empirical_gram(const SplineSpec& spec, const Dataset& dataset,
                               std::optional<int> class_filter = std::nullopt);

double min_eigenvalue(const Eigen::MatrixXd& sym);

// 1/lambda_min of a symmetric matrix; +infinity when lambda_min <= 0.
double inverse_op_norm(const Eigen::MatrixXd& sym);

}  // namespace driftlab

#include "driftlab/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftlab/errors.hpp"

namespace driftlab {

SplineSpec SplineSpec::make(double half_width, int interior, int degree) {
  if (!(half_width > 0.0)) throw ConfigError("spline: A must be positive");
  if (interior < 1) throw ConfigError("spline: K must be >= 1");
  if (degree < 1) throw ConfigError("spline: M must be >= 1");

  SplineSpec spec;
  spec.half_width = half_width;
  spec.interior = interior;
  spec.degree = degree;
  spec.knots.resize(interior + 2 * degree + 1);
  const double step = 2.0 * half_width / interior;
  for (int i = 0; i <= degree; ++i) {
    spec.knots[i] = -half_width;
    spec.knots[interior + degree + i] = half_width;
  }
  for (int k = 1; k < interior; ++k) spec.knots[degree + k] = -half_width + k * step;
  return spec;
}

namespace {

// Index i with knots[i] <= x < knots[i+1], restricted to the nonempty spans
// [M, M+K-1]; x = A falls into the last span. Returns -1 outside [-A, A].
int find_span(const SplineSpec& spec, double x) {
  if (x < -spec.half_width || x > spec.half_width) return -1;
  const int lo = spec.degree;
  const int hi = spec.degree + spec.interior - 1;
  int i = lo + static_cast<int>((x + spec.half_width) / spec.spacing());
  i = std::clamp(i, lo, hi);
  // guard against rounding at interior knots
  while (i > lo && x < spec.knots[i]) --i;
  while (i < hi && x >= spec.knots[i + 1]) ++i;
  return i;
}

}  // namespace

void eval_basis_active(const SplineSpec& spec, double x, ActiveBasis& out) {
  const int degree = spec.degree;
  const int span = find_span(spec, x);
  if (span < 0) {
    out.first = 0;
    out.count = 0;
    return;
  }
  out.first = span - degree;
  out.count = degree + 1;
  out.values.resize(degree + 1);
  out.left.resize(degree + 1);
  out.right.resize(degree + 1);

  out.values[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    out.left[j] = x - spec.knots[span + 1 - j];
    out.right[j] = spec.knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = out.right[r + 1] + out.left[j - r];
      const double temp = denom != 0.0 ? out.values[r] / denom : 0.0;
      out.values[r] = saved + out.right[r + 1] * temp;
      saved = out.left[j - r] * temp;
    }
    out.values[j] = saved;
  }
}

std::vector<double> eval_basis(const SplineSpec& spec, double x) {
  std::vector<double> full(spec.dim(), 0.0);
  ActiveBasis active;
  eval_basis_active(spec, x, active);
  for (int i = 0; i < active.count; ++i) full[active.first + i] = active.values[i];
  return full;
}

Eigen::MatrixXd design_matrix(const SplineSpec& spec, std::span<const double> xs) {
  if (xs.empty()) throw ConfigError("design_matrix: no sample points");
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<long>(xs.size()), spec.dim());
  ActiveBasis active;
  for (size_t r = 0; r < xs.size(); ++r) {
    eval_basis_active(spec, xs[r], active);
    for (int i = 0; i < active.count; ++i) design(r, active.first + i) = active.values[i];
  }
  return design;
}

Eigen::MatrixXd empirical_gram(const SplineSpec& spec, const Dataset& dataset,
                               std::optional<int> class_filter) {
  const int dim = spec.dim();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
  long selected = 0;
  ActiveBasis active;
  for (const Path& path : dataset.paths()) {
    if (class_filter && (!path.label || *path.label != *class_filter)) continue;
    ++selected;
    for (int k = 0; k < path.n; ++k) {
      eval_basis_active(spec, path.values[k], active);
      for (int a = 0; a < active.count; ++a) {
        const double va = active.values[a];
        for (int b = a; b < active.count; ++b) {
          gram(active.first + a, active.first + b) += va * active.values[b];
        }
      }
    }
  }
  if (selected == 0) throw EmptySelection("empirical_gram: no paths after class filter");
  gram /= static_cast<double>(selected) * dataset.n();
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < a; ++b) gram(a, b) = gram(b, a);
  return gram;
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double inverse_op_norm(const Eigen::MatrixXd& sym) {
  const double lambda_min = min_eigenvalue(sym);
  if (lambda_min <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / lambda_min;
}

}  // namespace driftlab

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "driftlab/bspline.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/rng.hpp"
#include "driftlab/simulate.hpp"

using namespace driftlab;

namespace {

// Hand-rolled symmetric Jacobi eigensolver, used as an oracle independent of
// the Eigen-based implementation path.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const size_t dim = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < dim; ++p)
      for (size_t q = p + 1; q < dim; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-26) break;
    for (size_t p = 0; p < dim; ++p) {
      for (size_t q = p + 1; q < dim; ++q) {
        if (std::abs(a[p][q]) < 1e-30) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (size_t k = 0; k < dim; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < dim; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eigenvalues(dim);
  for (size_t i = 0; i < dim; ++i) eigenvalues[i] = a[i][i];
  std::sort(eigenvalues.begin(), eigenvalues.end());
  return eigenvalues;
}

// Direct piecewise-linear hats: for degree 1, basis l peaks at node -A + l s.
std::vector<double> linear_hats(const SplineSpec& spec, double x) {
  std::vector<double> values(spec.dim(), 0.0);
  if (x < -spec.half_width || x > spec.half_width) return values;
  const double s = spec.spacing();
  int cell = std::min(spec.interior - 1,
                      static_cast<int>((x + spec.half_width) / s));
  const double theta = (x - (-spec.half_width + cell * s)) / s;
  values[cell] = 1.0 - theta;
  values[cell + 1] = theta;
  return values;
}

}  // namespace

TEST_CASE("knot construction") {
  const auto spec = SplineSpec::make(1.0, 2, 1);
  CHECK(spec.knots == std::vector<double>{-1.0, -1.0, 0.0, 1.0, 1.0});
  CHECK(spec.dim() == 3);

  const auto tiny = SplineSpec::make(1.0, 1, 1);
  CHECK(tiny.knots == std::vector<double>{-1.0, -1.0, 1.0, 1.0});
  CHECK(tiny.dim() == 2);

  const auto wide = SplineSpec::make(2.5, 4, 3);
  CHECK(wide.dim() == 7);
  CHECK(wide.knots.size() == 4 + 2 * 3 + 1);
  CHECK(wide.spacing() == doctest::Approx(1.25).epsilon(1e-15));
  for (int i = 0; i <= 3; ++i) {
    CHECK(wide.knots[i] == -2.5);
    CHECK(wide.knots[wide.knots.size() - 1 - i] == 2.5);
  }
  CHECK(wide.knots[4] == doctest::Approx(-1.25));

  CHECK_THROWS_AS(SplineSpec::make(0.0, 2, 1), ConfigError);
  CHECK_THROWS_AS(SplineSpec::make(1.0, 0, 1), ConfigError);
  CHECK_THROWS_AS(SplineSpec::make(1.0, 2, 0), ConfigError);
}

TEST_CASE("degree-1 basis equals the direct hat formula") {
  const auto spec = SplineSpec::make(1.0, 2, 1);
  CHECK(eval_basis(spec, -1.0) == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(eval_basis(spec, 0.0) == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(eval_basis(spec, 1.0) == std::vector<double>{0.0, 0.0, 1.0});
  const auto mid = eval_basis(spec, 0.5);
  CHECK(mid[0] == 0.0);
  CHECK(mid[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(mid[2] == doctest::Approx(0.5).epsilon(1e-14));

  Rng rng(derive_stream(31, {}));
  for (int trial = 0; trial < 50; ++trial) {
    const double a = 0.5 + 3.0 * rng.next_uniform();
    const int k = 1 + static_cast<int>(rng.next_uniform() * 12);
    const auto s = SplineSpec::make(a, k, 1);
    for (int i = 0; i < 20; ++i) {
      const double x = -a + 2.0 * a * rng.next_uniform();
      const auto ours = eval_basis(s, x);
      const auto oracle = linear_hats(s, x);
      REQUIRE(ours.size() == oracle.size());
      for (size_t l = 0; l < ours.size(); ++l)
        CHECK(ours[l] == doctest::Approx(oracle[l]).epsilon(1e-12));
    }
  }
}

TEST_CASE("partition of unity, positivity and local support") {
  Rng rng(derive_stream(32, {}));
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = 0.5 + 4.5 * rng.next_uniform();
    const int k = 1 + static_cast<int>(rng.next_uniform() * 50);
    const int m = 1 + static_cast<int>(rng.next_uniform() * 3);
    const auto spec = SplineSpec::make(a, k, m);
    const double x = -a + 2.0 * a * rng.next_uniform();
    const auto basis = eval_basis(spec, x);
    double sum = 0.0;
    int active = 0;
    for (double v : basis) {
      CHECK(v >= 0.0);
      sum += v;
      active += v != 0.0;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-10);
    CHECK(active <= m + 1);
  }
}

TEST_CASE("basis vanishes outside the interval") {
  const auto spec = SplineSpec::make(2.0, 5, 3);
  for (double x : {-2.0000001, 2.0000001, -10.0, 10.0}) {
    for (double v : eval_basis(spec, x)) CHECK(v == 0.0);
  }
}

TEST_CASE("continuity proxy: jumps shrink linearly with the grid step") {
  for (int degree : {2, 3}) {
    const auto spec = SplineSpec::make(2.0, 8, degree);
    auto max_jump = [&](int grid) {
      double jump = 0.0;
      auto prev = eval_basis(spec, -2.0);
      for (int i = 1; i <= grid; ++i) {
        const auto cur = eval_basis(spec, -2.0 + 4.0 * i / grid);
        for (int l = 0; l < spec.dim(); ++l)
          jump = std::max(jump, std::abs(cur[l] - prev[l]));
        prev = cur;
      }
      return jump;
    };
    const double coarse = max_jump(1000);
    const double fine = max_jump(10000);
    CHECK(fine <= std::max(0.3 * coarse, 1e-6));
  }
}

TEST_CASE("design matrix rows") {
  const auto spec = SplineSpec::make(1.5, 4, 2);
  const std::vector<double> xs = {-1.5, 1.5, 2.0};
  const Eigen::MatrixXd design = design_matrix(spec, xs);
  REQUIRE(design.rows() == 3);
  REQUIRE(design.cols() == spec.dim());
  CHECK(design(0, 0) == 1.0);
  for (int c = 1; c < spec.dim(); ++c) CHECK(design(0, c) == 0.0);
  CHECK(design(1, spec.dim() - 1) == 1.0);
  for (int c = 0; c + 1 < spec.dim(); ++c) CHECK(design(1, c) == 0.0);
  CHECK(design.row(2).cwiseAbs().sum() == 0.0);  // outside the interval

  std::vector<double> uniform;
  for (int i = 0; i < 100; ++i) uniform.push_back(-1.5 + 3.0 * i / 99.0);
  const Eigen::MatrixXd full = design_matrix(spec, uniform);
  for (int r = 0; r < full.rows(); ++r)
    CHECK(full.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(design_matrix(spec, std::span<const double>{}), ConfigError);
}

TEST_CASE("empirical gram: single sticky path activates one hat") {
  Path still;
  still.n = 8;
  still.values.assign(9, 0.0);
  still.label = 0;
  const Dataset ds(std::vector<Path>{still});
  const auto spec = SplineSpec::make(1.0, 2, 1);
  const Eigen::MatrixXd gram = empirical_gram(spec, ds);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(gram(a, b) == (a == 1 && b == 1 ? 1.0 : 0.0));
}

TEST_CASE("empirical gram: positive definite on Brownian data, stable under doubling") {
  const auto model =
      MixtureModel::create(CoefficientFn::constant(0.0), CoefficientFn::constant(0.0),
                           CoefficientFn::constant(1.0), 0.5, 0.5);
  const Dataset ds = generate_dataset(model, 200, 100, 808);
  const auto spec = SplineSpec::make(2.0, 4, 3);
  const Eigen::MatrixXd gram = empirical_gram(spec, ds);

  // symmetry and PSD
  CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(min_eigenvalue(gram) > 0.0);

  // doubling the dataset leaves the average unchanged
  std::vector<Path> doubled = ds.paths();
  for (const Path& p : ds.paths()) doubled.push_back(p);
  const Eigen::MatrixXd gram2 = empirical_gram(spec, Dataset(std::move(doubled)));
  CHECK((gram - gram2).cwiseAbs().maxCoeff() <= 1e-12);

  // class filter with no members
  std::vector<Path> only_zero;
  for (Path p : ds.paths()) {
    p.label = 0;
    only_zero.push_back(std::move(p));
  }
  CHECK_THROWS_AS(empirical_gram(spec, Dataset(std::move(only_zero)), 1), EmptySelection);
}

TEST_CASE("inverse operator norm") {
  CHECK(inverse_op_norm(Eigen::MatrixXd::Identity(5, 5)) == doctest::Approx(1.0));
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
  diag(0, 0) = 2.0;
  diag(1, 1) = 0.5;
  CHECK(inverse_op_norm(diag) == doctest::Approx(2.0));

  // rank-deficient: sentinel
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
  singular(0, 0) = 1.0;
  CHECK(std::isinf(inverse_op_norm(singular)));

  // random 4x4 gram vs the Jacobi oracle
  Rng rng(derive_stream(33, {}));
  Eigen::MatrixXd b(50, 4);
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 4; ++c) b(r, c) = 2.0 * rng.next_uniform() - 1.0;
  const Eigen::MatrixXd gram = b.transpose() * b / 50.0;
  std::vector<std::vector<double>> copy(4, std::vector<double>(4));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) copy[r][c] = gram(r, c);
  const double oracle_min = jacobi_eigenvalues(copy).front();
  CHECK(inverse_op_norm(gram) == doctest::Approx(1.0 / oracle_min).epsilon(1e-8));
}

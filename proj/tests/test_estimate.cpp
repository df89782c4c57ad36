#include <cmath>
#include <vector>

#include "doctest.h"
#include "driftlab/errors.hpp"
#include "driftlab/estimators.hpp"
#include "driftlab/simulate.hpp"

using namespace driftlab;

namespace {

MixtureModel constant_model(double mu0, double mu1, double alpha, double p0 = 0.5) {
  return MixtureModel::create(CoefficientFn::constant(mu0), CoefficientFn::constant(mu1),
                              CoefficientFn::constant(alpha), p0, 1.0 - p0);
}

double objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& z,
                 const Eigen::VectorXd& a) {
  return (z - design * a).squaredNorm();
}

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = scale * (2.0 * rng.next_uniform() - 1.0);
  return m;
}

}  // namespace

TEST_CASE("constrained LS: degenerate ball") {
  Rng rng(derive_stream(41, {}));
  const Eigen::MatrixXd design = random_matrix(rng, 10, 3);
  Eigen::VectorXd z(10);
  for (int i = 0; i < 10; ++i) z[i] = rng.next_uniform();
  const auto fit = constrained_ls(design, z, 0.0);
  CHECK(fit.coeffs.norm() == 0.0);
  CHECK(fit.multiplier == 0.0);
  CHECK(fit.constraint_active);
}

TEST_CASE("constrained LS: slack constraint reproduces the normal equations") {
  Rng rng(derive_stream(42, {}));
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd design = random_matrix(rng, 50, 3);
    Eigen::VectorXd z(50);
    for (int i = 0; i < 50; ++i) z[i] = 2.0 * rng.next_uniform() - 1.0;
    const auto fit = constrained_ls(design, z, 1e6);
    CHECK_FALSE(fit.constraint_active);
    CHECK(fit.multiplier == 0.0);
    // oracle: direct dense solve of the normal equations
    const Eigen::VectorXd oracle =
        (design.transpose() * design).ldlt().solve(design.transpose() * z);
    CHECK((fit.coeffs - oracle).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("constrained LS: binding constraint matches a dense boundary-grid oracle") {
  Rng rng(derive_stream(43, {}));
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd design = random_matrix(rng, 10, 2);
    Eigen::VectorXd z(10);
    for (int i = 0; i < 10; ++i) z[i] = 3.0 * (2.0 * rng.next_uniform() - 1.0) + 5.0;
    const double radius_sq = 0.04;  // small enough to bind
    const auto fit = constrained_ls(design, z, radius_sq);
    REQUIRE(fit.constraint_active);
    CHECK(fit.multiplier > 0.0);
    CHECK(fit.coeffs.squaredNorm() == doctest::Approx(radius_sq).epsilon(1e-6));

    const double radius = std::sqrt(radius_sq);
    double best = 1e300;
    const int angles = 1000000;
    // objective over the circle via precomputed quadratic form
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * z;
    const double zz = z.squaredNorm();
    for (int i = 0; i < angles; ++i) {
      const double theta = 2.0 * M_PI * i / angles;
      const double a0 = radius * std::cos(theta), a1 = radius * std::sin(theta);
      const double value = zz - 2.0 * (a0 * rhs[0] + a1 * rhs[1]) + a0 * a0 * gram(0, 0) +
                           2.0 * a0 * a1 * gram(0, 1) + a1 * a1 * gram(1, 1);
      best = std::min(best, value);
    }
    CHECK(objective(design, z, fit.coeffs) <= best + 1e-6);
  }
}

TEST_CASE("constrained LS: feasibility, complementarity, probe optimality") {
  Rng rng(derive_stream(44, {}));
  for (int trial = 0; trial < 30; ++trial) {
    const int cols = 2 + static_cast<int>(rng.next_uniform() * 3);
    const int rows = cols + 1 + static_cast<int>(rng.next_uniform() * 40);
    const Eigen::MatrixXd design = random_matrix(rng, rows, cols);
    Eigen::VectorXd z(rows);
    for (int i = 0; i < rows; ++i) z[i] = 4.0 * (2.0 * rng.next_uniform() - 1.0);
    const double radius_sq = trial % 2 == 0 ? 0.1 : 100.0;
    const auto fit = constrained_ls(design, z, radius_sq);

    CHECK(fit.coeffs.squaredNorm() <= radius_sq + 1e-9);
    CHECK(fit.multiplier * (radius_sq - fit.coeffs.squaredNorm()) <= 1e-6 * radius_sq);

    const double fitted_objective = objective(design, z, fit.coeffs);
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd candidate(cols);
      for (int c = 0; c < cols; ++c) candidate[c] = 2.0 * rng.next_uniform() - 1.0;
      candidate *= std::sqrt(radius_sq) * rng.next_uniform() / std::max(candidate.norm(), 1e-12);
      CHECK(fitted_objective <= objective(design, z, candidate) + 1e-8);
    }
  }
}

TEST_CASE("constrained LS: rejects bad input") {
  Rng rng(derive_stream(45, {}));
  const Eigen::MatrixXd design = random_matrix(rng, 5, 2);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(constrained_ls(design, z, -1.0), ConfigError);
  z[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(constrained_ls(design, z, 1.0), ConfigError);
  CHECK_THROWS_AS(constrained_ls(design, Eigen::VectorXd::Ones(4), 1.0), ConfigError);
}

TEST_CASE("constrained LS is linear in the responses while slack") {
  Rng rng(derive_stream(46, {}));
  const Eigen::MatrixXd design = random_matrix(rng, 40, 4);
  Eigen::VectorXd z(40);
  for (int i = 0; i < 40; ++i) z[i] = 2.0 * rng.next_uniform() - 1.0;
  const auto base = constrained_ls(design, z, 1e8);
  const auto scaled = constrained_ls(design, Eigen::VectorXd(4.0 * z), 1e8);
  CHECK((scaled.coeffs - 4.0 * base.coeffs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("schedule arithmetic from the rate theorems") {
  const auto bounded = schedule(1000, 1.0, Regime::kBounded);
  CHECK(bounded.half_width == doctest::Approx(std::sqrt(2.0 / 3.0 * std::log(1000.0))));
  CHECK(bounded.half_width == doctest::Approx(2.146).epsilon(1e-3));
  CHECK(bounded.interior == 1);  // raw 0.0797 clamped up

  const auto unbounded = schedule(1000, 1.0, Regime::kUnboundedDrift);
  CHECK(unbounded.half_width == doctest::Approx(std::sqrt(2.0 * std::log(1000.0))));
  CHECK(unbounded.half_width == doctest::Approx(3.717).epsilon(1e-3));

  const auto scaled = schedule(1000, 1.0, Regime::kBounded, 100.0);
  CHECK(scaled.interior == 8);  // round(100 * 0.0797)

  CHECK_THROWS_AS(schedule(1, 1.0, Regime::kBounded), ConfigError);
  CHECK_THROWS_AS(schedule(1000, 0.5, Regime::kBounded), ConfigError);
  CHECK_THROWS_AS(schedule(1000, 1.0, Regime::kConstant), ConfigError);

  const auto diff = diffusion_schedule(1000, 1.0);
  CHECK(diff.half_width == doctest::Approx(std::log(1000.0)));
  CHECK(diff.interior == 10);
}

TEST_CASE("drift fit: degenerate class gives the zero function") {
  Path p0;
  p0.n = 4;
  p0.values = {0.0, 0.1, 0.2, 0.1, 0.0};
  p0.label = 0;
  Path p1 = p0;
  p1.label = 1;
  Path p2 = p0;
  p2.label = 0;
  const Dataset ds(std::vector<Path>{p0, p1, p2});  // N_1 = 1
  ScheduleParams params;
  params.half_width = 2.0;
  params.interior = 2;
  const auto est = fit_drift(ds, 1, params, 1, 3);
  CHECK(est.degenerate);
  for (double x : {-1.0, 0.0, 0.5, 3.0}) CHECK(est(x) == 0.0);
}

TEST_CASE("drift fit recovers a constant drift at the origin") {
  const auto model = constant_model(0.7, 0.7, 0.5);
  const Dataset ds = generate_dataset(model, 1000, 200, 515);
  const long class_size = ds.count(0);
  REQUIRE(class_size > 400);
  const auto params = schedule(class_size, 1.0, Regime::kBounded, 30.0);
  const auto est = fit_drift(ds, 0, params, 3, 1000);
  CHECK_FALSE(est.degenerate);
  CHECK(est(0.0) == doctest::Approx(0.7).epsilon(0.1 / 0.7));
  // feasibility of the returned fit
  CHECK(est.fit.coeffs.squaredNorm() <= est.fit.constraint_radius_sq + 1e-9);
}

TEST_CASE("drift fit on all-zero responses returns the zero function") {
  Path still;
  still.n = 6;
  still.values.assign(7, 0.25);
  still.label = 0;
  const Dataset ds(std::vector<Path>{still, still, still});
  ScheduleParams params;
  params.half_width = 1.0;
  params.interior = 2;
  const auto est = fit_drift(ds, 0, params, 1, 3);
  for (double x : {-0.5, 0.0, 0.25, 0.9}) CHECK(est(x) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("drift evaluation: partition of unity and clamping") {
  DriftEstimate est;
  est.fit.spec = SplineSpec::make(2.0, 5, 2);
  est.truncation_level = 3.0;
  est.class_label = 0;

  est.fit.coeffs = Eigen::VectorXd::Constant(est.fit.spec.dim(), 1.25);
  for (double x : {-2.0, -0.3, 0.0, 1.7, 2.0})
    CHECK(est(x) == doctest::Approx(1.25).epsilon(1e-12));

  est.fit.coeffs = Eigen::VectorXd::Constant(est.fit.spec.dim(), 6.0);  // 2x the level
  CHECK(est(0.4) == 3.0);
  est.fit.coeffs = Eigen::VectorXd::Constant(est.fit.spec.dim(), -6.0);
  CHECK(est(0.4) == -3.0);
}

TEST_CASE("diffusion fit recovers a unit diffusion at the origin") {
  const auto model = constant_model(0.0, 0.0, 1.0);
  const Dataset ds = generate_dataset(model, 500, 200, 909);
  const auto sched = diffusion_schedule(500, 1.0);
  const auto est = fit_diffusion(ds, sched.half_width, sched.interior, 3, 500);
  CHECK(est(0.0) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(est.lower_clamp == doctest::Approx(1.0 / std::log(500.0)));
  CHECK(est.upper_clamp == doctest::Approx(std::log(500.0)));
}

TEST_CASE("diffusion clamp binds exactly") {
  DiffusionEstimate est;
  est.fit.spec = SplineSpec::make(1.0, 2, 1);
  est.fit.coeffs = Eigen::VectorXd::Zero(est.fit.spec.dim());
  est.lower_clamp = 0.25;
  est.upper_clamp = 4.0;
  CHECK(est(0.0) == 0.25);  // raw fit below the floor
  est.fit.coeffs = Eigen::VectorXd::Constant(est.fit.spec.dim(), 100.0);
  CHECK(est(0.0) == 4.0);
}

TEST_CASE("label frequency estimator") {
  Path a;
  a.n = 1;
  a.values = {0.0, 0.0};
  a.label = 0;
  Path b = a;
  b.label = 1;
  CHECK(estimate_p(Dataset({a, a})) == std::pair<double, double>{1.0, 0.0});
  CHECK(estimate_p(Dataset({a, b, a, b})) == std::pair<double, double>{0.5, 0.5});

  const auto model = constant_model(0.0, 1.0, 1.0, 0.3);
  const auto p = estimate_p(generate_dataset(model, 10000, 2, 61));
  CHECK(std::abs(p.first - 0.3) <= 0.02);
  CHECK(p.first + p.second == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("constant-model estimators") {
  // telescoping identity on an arbitrary path
  Path p;
  p.n = 64;
  Rng walk(derive_stream(47, {}));
  p.values.resize(65);
  p.values[0] = 0.4;
  for (int k = 1; k <= 64; ++k) p.values[k] = p.values[k - 1] + walk.next_normal() * 0.1;
  double sum = 0.0;
  for (double zk : responses_z(p)) sum += zk;
  CHECK(sum / 64.0 == doctest::Approx(p.values.back() - p.values.front()).epsilon(1e-12));

  // consistency at scale
  const auto model = constant_model(0.0, 1.0, 1.0);
  const Dataset ds = generate_dataset(model, 10000, 100, 2718);
  const auto est = constant_estimators(ds);
  CHECK(std::abs(est.mu1_hat - 1.0) <= 0.03);
  CHECK(std::abs(est.mu0_hat) <= 0.03);
  CHECK(std::abs(est.alpha_sq_tilde - 1.0) <= 0.05);
  CHECK(est.p_hat.first == doctest::Approx(0.5).epsilon(0.05));

  // degenerate class 1: alpha falls back to the clamp floor
  Path z0 = p;
  z0.label = 0;
  Path z1 = p;
  z1.label = 1;
  const Dataset degenerate(std::vector<Path>{z0, z0, z1});
  const auto dest = constant_estimators(degenerate);
  CHECK(dest.degenerate1);
  CHECK(dest.alpha_sq_hat == 0.0);
  CHECK(dest.alpha_sq_tilde == 1.0 / truncation_scale(3));
}

TEST_CASE("truncation contractions") {
  Rng rng(derive_stream(48, {}));

  // drift: whenever |b*(x)| <= level, clamping never moves away from it
  DriftEstimate drift;
  drift.fit.spec = SplineSpec::make(2.0, 6, 2);
  drift.truncation_level = 1.5;
  drift.fit.coeffs = Eigen::VectorXd(drift.fit.spec.dim());
  for (int i = 0; i < drift.fit.spec.dim(); ++i)
    drift.fit.coeffs[i] = 6.0 * (2.0 * rng.next_uniform() - 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = -2.0 + 4.0 * rng.next_uniform();
    const double truth = 1.5 * (2.0 * rng.next_uniform() - 1.0);
    CHECK(std::abs(drift(x) - truth) <= std::abs(drift.raw(x) - truth));
  }

  // diffusion clamp window
  DiffusionEstimate diffusion;
  diffusion.fit.spec = drift.fit.spec;
  diffusion.fit.coeffs = drift.fit.coeffs;
  diffusion.lower_clamp = 0.2;
  diffusion.upper_clamp = 2.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = -2.0 + 4.0 * rng.next_uniform();
    const double truth = 0.2 + 1.8 * rng.next_uniform();
    CHECK(std::abs(diffusion(x) - truth) <= std::abs(diffusion.raw(x) - truth));
  }

  // constant-model alpha clamp: |a~ - a*| <= |a^ - a*| when a* >= floor
  for (int trial = 0; trial < 1000; ++trial) {
    const double floor = 0.3;
    const double truth = floor + 2.0 * rng.next_uniform();
    const double raw = 3.0 * rng.next_uniform() - 0.5;
    const double clamped = raw >= floor ? raw : floor;
    CHECK(std::abs(clamped - truth) <= std::abs(raw - truth));
  }
}

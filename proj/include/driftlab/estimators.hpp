#pragma once

#include <Eigen/Dense>
#include <utility>

#include "driftlab/bspline.hpp"
#include "driftlab/constrained_ls.hpp"
#include "driftlab/path.hpp"

namespace driftlab {

enum class Regime { kBounded, kUnboundedDrift, kConstant };

// Truncation scale: natural log of the sample size, floored at 1 so tiny
// samples do not produce degenerate clamp windows.
double truncation_scale(long sample_size);

// Hyperparameter schedule for the drift estimator of one class:
//   A = sqrt(c beta/(2 beta + 1) log N_i), c = 2 (bounded) or 6 (unbounded),
//   K = max(1, round(k_scale N_i^{1/(2 beta+1)} log(N_i)^{-5/2})).
// The raw K falls below 1 at desk-scale N_i, hence the clamp and the k_scale
// knob.
struct ScheduleParams {
  double beta = 1.0;
  Regime regime = Regime::kBounded;
  double half_width = 1.0;  // A
  int interior = 1;         // K
  double k_scale = 1.0;
};
ScheduleParams schedule(long class_size, double beta, Regime regime, double k_scale = 1.0);

// Schedule for the squared-diffusion estimator: A = max(1, log N),
// K = max(1, round(k_scale N^{1/(2 beta+1)})).
struct DiffusionSchedule {
  double half_width = 1.0;
  int interior = 1;
};
DiffusionSchedule diffusion_schedule(long total_size, double beta, double k_scale = 1.0);

// Constrained least-squares projection onto a spline space.
struct SplineFit {
  SplineSpec spec;
  Eigen::VectorXd coeffs;
  double constraint_radius_sq = 0.0;
  double lagrange_multiplier = 0.0;
  bool constraint_active = false;

  // Raw spline value sum_l a_l B_l(x); 0 outside [-A, A].
  double value(double x) const;
};

// Truncated drift estimator for one class; evaluates to 0 everywhere when the
// class had at most one path.
struct DriftEstimate {
  SplineFit fit;
  double truncation_level = 1.0;  // log N
  int class_label = 0;
  bool degenerate = false;

  double raw(double x) const { return degenerate ? 0.0 : fit.value(x); }
  double operator()(double x) const;

  static DriftEstimate make_degenerate(int class_label, double truncation_level);
};

// Truncated squared-diffusion estimator, clamped into [1/log N, log N].
struct DiffusionEstimate {
  SplineFit fit;
  double lower_clamp = 1.0;
  double upper_clamp = 1.0;

  double raw(double x) const { return fit.value(x); }
  double operator()(double x) const;
};

// Drift projection estimator for the given class: constrained least squares
// on the class sample points with responses Z and constraint radius
// (K+M) A^2 log(N_total).
DriftEstimate fit_drift(const Dataset& dataset, int class_label, const ScheduleParams& params,
                        int degree, long n_total);

// Squared-diffusion projection estimator on all paths (the diffusion
// coefficient does not depend on the label), responses U.
DiffusionEstimate fit_diffusion(const Dataset& dataset, double a_tilde, int k_tilde, int degree,
                                long n_total);

// (N0/N, N1/N).
std::pair<double, double> estimate_p(const Dataset& dataset);

// Closed-form estimators for the constant-coefficient model. The per-path
// statistic (1/n) sum_k (X_{k+1}-X_k)/dt telescopes to X_n - X_0.
struct ConstantModelEstimate {
  double mu0_hat = 0.0;
  double mu1_hat = 0.0;
  double alpha_sq_hat = 0.0;    // unbiased variance over class-1 statistics
  double alpha_sq_tilde = 1.0;  // max(alpha_sq_hat, 1/log N)
  std::pair<double, double> p_hat{0.0, 0.0};
  bool degenerate0 = false;  // N_0 <= 1
  bool degenerate1 = false;  // N_1 <= 1
};
ConstantModelEstimate constant_estimators(const Dataset& dataset);

// Same estimators from the per-path statistics directly (labels[j] paired
// with z_stats[j] = X_n^j - X_0^j); the Dataset overload delegates here.
ConstantModelEstimate constant_estimators(std::span<const int> labels,
                                          std::span<const double> z_stats);

}  // namespace driftlab

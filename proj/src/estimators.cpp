#include "driftlab/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "driftlab/errors.hpp"

namespace driftlab {

double truncation_scale(long sample_size) {
  if (sample_size < 1) throw ConfigError("truncation_scale: sample size must be >= 1");
  return std::max(1.0, std::log(static_cast<double>(sample_size)));
}

ScheduleParams schedule(long class_size, double beta, Regime regime, double k_scale) {
  if (class_size < 2) throw ConfigError("schedule: N_i must be >= 2");
  if (!(beta >= 1.0)) throw ConfigError("schedule: beta must be >= 1");
  if (!(k_scale > 0.0)) throw ConfigError("schedule: K_scale must be positive");
  if (regime == Regime::kConstant)
    throw ConfigError("schedule: constant regime has no spline schedule");

  const double log_n = std::log(static_cast<double>(class_size));
  const double drift_const = regime == Regime::kUnboundedDrift ? 6.0 : 2.0;
  ScheduleParams params;
  params.beta = beta;
  params.regime = regime;
  params.k_scale = k_scale;
  params.half_width = std::sqrt(drift_const * beta / (2.0 * beta + 1.0) * log_n);
  const double raw_k = k_scale * std::pow(static_cast<double>(class_size), 1.0 / (2.0 * beta + 1.0)) *
                       std::pow(log_n, -2.5);
  params.interior = std::max(1, static_cast<int>(std::lround(raw_k)));
  return params;
}

DiffusionSchedule diffusion_schedule(long total_size, double beta, double k_scale) {
  if (total_size < 2) throw ConfigError("diffusion_schedule: N must be >= 2");
  if (!(beta >= 1.0)) throw ConfigError("diffusion_schedule: beta must be >= 1");
  DiffusionSchedule sched;
  sched.half_width = std::max(1.0, std::log(static_cast<double>(total_size)));
  const double raw_k =
      k_scale * std::pow(static_cast<double>(total_size), 1.0 / (2.0 * beta + 1.0));
  sched.interior = std::max(1, static_cast<int>(std::lround(raw_k)));
  return sched;
}

double SplineFit::value(double x) const {
  ActiveBasis active;
  eval_basis_active(spec, x, active);
  double total = 0.0;
  for (int i = 0; i < active.count; ++i) total += coeffs[active.first + i] * active.values[i];
  return total;
}

double DriftEstimate::operator()(double x) const {
  if (degenerate) return 0.0;
  return std::clamp(fit.value(x), -truncation_level, truncation_level);
}

DriftEstimate DriftEstimate::make_degenerate(int class_label, double truncation_level) {
  DriftEstimate est;
  est.fit.spec = SplineSpec::make(1.0, 1, 1);
  est.fit.coeffs = Eigen::VectorXd::Zero(est.fit.spec.dim());
  est.truncation_level = truncation_level;
  est.class_label = class_label;
  est.degenerate = true;
  return est;
}

double DiffusionEstimate::operator()(double x) const {
  return std::clamp(fit.value(x), lower_clamp, upper_clamp);
}

namespace {

// Accumulates B^T B and B^T z over the sample points (k = 0..n-1) of the
// selected paths, with per-point responses provided by a callback.
template <class ResponseFn>
void accumulate_normal_equations(const SplineSpec& spec, const Dataset& dataset,
                                 std::optional<int> class_filter, ResponseFn&& response,
                                 Eigen::MatrixXd& gram, Eigen::VectorXd& rhs, long& selected) {
  const int dim = spec.dim();
  gram = Eigen::MatrixXd::Zero(dim, dim);
  rhs = Eigen::VectorXd::Zero(dim);
  selected = 0;
  ActiveBasis active;
  const double scale = static_cast<double>(dataset.n());
  for (const Path& path : dataset.paths()) {
    if (class_filter && (!path.label || *path.label != *class_filter)) continue;
    ++selected;
    for (int k = 0; k < path.n; ++k) {
      const double x = path.values[k];
      const double z = response(path, k, scale);
      eval_basis_active(spec, x, active);
      for (int a = 0; a < active.count; ++a) {
        const double va = active.values[a];
        rhs[active.first + a] += va * z;
        for (int b = a; b < active.count; ++b) {
          gram(active.first + a, active.first + b) += va * active.values[b];
        }
      }
    }
  }
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < a; ++b) gram(a, b) = gram(b, a);
}

}  // namespace

DriftEstimate fit_drift(const Dataset& dataset, int class_label, const ScheduleParams& params,
                        int degree, long n_total) {
  if (class_label != 0 && class_label != 1) throw ConfigError("fit_drift: label must be 0 or 1");
  if (degree < 1) throw ConfigError("fit_drift: M must be >= 1");
  if (n_total < 1) throw ConfigError("fit_drift: N_total must be >= 1");

  const double level = truncation_scale(n_total);
  if (dataset.count(class_label) <= 1) return DriftEstimate::make_degenerate(class_label, level);

  const SplineSpec spec = SplineSpec::make(params.half_width, params.interior, degree);
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  long selected = 0;
  accumulate_normal_equations(
      spec, dataset, class_label,
      [](const Path& p, int k, double scale) { return (p.values[k + 1] - p.values[k]) * scale; },
      gram, rhs, selected);

  const double radius_sq = spec.dim() * params.half_width * params.half_width *
                           std::log(static_cast<double>(n_total));
  const ConstrainedLsResult solution = constrained_ls_normal(gram, rhs, radius_sq);

  DriftEstimate est;
  est.fit.spec = spec;
  est.fit.coeffs = solution.coeffs;
  est.fit.constraint_radius_sq = solution.radius_sq;
  est.fit.lagrange_multiplier = solution.multiplier;
  est.fit.constraint_active = solution.constraint_active;
  est.truncation_level = level;
  est.class_label = class_label;
  est.degenerate = false;
  return est;
}

DiffusionEstimate fit_diffusion(const Dataset& dataset, double a_tilde, int k_tilde, int degree,
                                long n_total) {
  if (degree < 1) throw ConfigError("fit_diffusion: M must be >= 1");
  if (n_total < 1) throw ConfigError("fit_diffusion: N must be >= 1");

  const SplineSpec spec = SplineSpec::make(a_tilde, k_tilde, degree);
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  long selected = 0;
  accumulate_normal_equations(
      spec, dataset, std::nullopt,
      [](const Path& p, int k, double scale) {
        const double d = p.values[k + 1] - p.values[k];
        return d * d * scale;
      },
      gram, rhs, selected);

  const double radius_sq =
      spec.dim() * a_tilde * a_tilde * std::log(static_cast<double>(n_total));
  const ConstrainedLsResult solution = constrained_ls_normal(gram, rhs, radius_sq);

  const double level = truncation_scale(n_total);
  DiffusionEstimate est;
  est.fit.spec = spec;
  est.fit.coeffs = solution.coeffs;
  est.fit.constraint_radius_sq = solution.radius_sq;
  est.fit.lagrange_multiplier = solution.multiplier;
  est.fit.constraint_active = solution.constraint_active;
  est.lower_clamp = 1.0 / level;
  est.upper_clamp = level;
  return est;
}

std::pair<double, double> estimate_p(const Dataset& dataset) {
  const double total = static_cast<double>(dataset.size());
  return {dataset.count(0) / total, dataset.count(1) / total};
}

ConstantModelEstimate constant_estimators(const Dataset& dataset) {
  std::vector<int> labels;
  std::vector<double> stats;
  labels.reserve(dataset.size());
  stats.reserve(dataset.size());
  for (const Path& p : dataset.paths()) {
    if (!p.label) throw ConfigError("constant_estimators: unlabeled path");
    labels.push_back(*p.label);
    stats.push_back(p.values.back() - p.values.front());
  }
  return constant_estimators(labels, stats);
}

ConstantModelEstimate constant_estimators(std::span<const int> labels,
                                          std::span<const double> z_stats) {
  if (labels.empty() || labels.size() != z_stats.size())
    throw ConfigError("constant_estimators: malformed statistics");

  long n0 = 0, n1 = 0;
  double sum0 = 0.0, sum1 = 0.0;
  for (size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] == 0) {
      ++n0;
      sum0 += z_stats[j];
    } else {
      ++n1;
      sum1 += z_stats[j];
    }
  }

  ConstantModelEstimate est;
  const double total = static_cast<double>(labels.size());
  est.p_hat = {static_cast<double>(n0) / total, static_cast<double>(n1) / total};
  est.degenerate0 = n0 <= 1;
  est.degenerate1 = n1 <= 1;
  est.mu0_hat = est.degenerate0 ? 0.0 : sum0 / static_cast<double>(n0);
  est.mu1_hat = est.degenerate1 ? 0.0 : sum1 / static_cast<double>(n1);

  double ssq1 = 0.0;
  if (!est.degenerate1) {
    for (size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 1) continue;
      const double d = z_stats[j] - est.mu1_hat;
      ssq1 += d * d;
    }
    est.alpha_sq_hat = ssq1 / static_cast<double>(n1 - 1);
  } else {
    est.alpha_sq_hat = 0.0;
  }

  const double floor = 1.0 / truncation_scale(static_cast<long>(labels.size()));
  est.alpha_sq_tilde = est.alpha_sq_hat >= floor ? est.alpha_sq_hat : floor;
  return est;
}

}  // namespace driftlab

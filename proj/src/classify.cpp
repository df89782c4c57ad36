#include "driftlab/classify.hpp"

#include <cmath>

#include "driftlab/simulate.hpp"

namespace driftlab {

double softmax_phi(double f0, double f1, std::pair<double, double> p) {
  const auto [p0, p1] = p;
  if (p0 < 0.0 || p1 < 0.0) throw ConfigError("softmax_phi: negative prior component");
  if (p0 + p1 <= 0.0) throw ConfigError("softmax_phi: prior components sum to zero");
  if (p0 == 0.0) return 1.0;
  if (p1 == 0.0) return 0.0;
  const double t = std::log(p0) - std::log(p1) + f0 - f1;
  return 1.0 / (1.0 + std::exp(t));
}

PluginClassifier::PluginClassifier(std::function<double(double)> drift0,
                                   std::function<double(double)> drift1,
                                   std::function<double(double)> sigma_sq,
                                   std::pair<double, double> prior)
    : drift0_(std::move(drift0)),
      drift1_(std::move(drift1)),
      sigma_sq_(std::move(sigma_sq)),
      prior_(prior) {
  if (prior_.first < 0.0 || prior_.second < 0.0 || prior_.first + prior_.second <= 0.0)
    throw ConfigError("classifier: invalid prior");
}

std::pair<double, double> PluginClassifier::statistics(const Path& path) const {
  double linear0 = 0.0, quad0 = 0.0;
  double linear1 = 0.0, quad1 = 0.0;
  for (int k = 0; k < path.n; ++k) {
    const double x = path.values[k];
    const double s2 = sigma_sq_(x);
    if (!(s2 > 0.0)) throw NumericalError("classifier: non-positive sigma^2 evaluation");
    const double dx = path.values[k + 1] - path.values[k];
    const double b0 = drift0_(x);
    const double b1 = drift1_(x);
    linear0 += b0 / s2 * dx;
    quad0 += b0 * b0 / s2;
    linear1 += b1 / s2 * dx;
    quad1 += b1 * b1 / s2;
  }
  const double half_dt = 0.5 * path.dt();
  return {linear0 - half_dt * quad0, linear1 - half_dt * quad1};
}

double PluginClassifier::posterior(const Path& path) const {
  if (prior_.first == 0.0) return 1.0;
  if (prior_.second == 0.0) return 0.0;
  const auto [f0, f1] = statistics(path);
  return softmax_phi(f0, f1, prior_);
}

int PluginClassifier::classify(const Path& path) const {
  if (prior_.first == 0.0) return 1;
  if (prior_.second == 0.0) return 0;
  const auto [f0, f1] = statistics(path);
  const double t = std::log(prior_.first) - std::log(prior_.second) + f0 - f1;
  return t <= 0.0 ? 1 : 0;
}

PluginClassifier make_plugin(const DriftEstimate& b0, const DriftEstimate& b1,
                             const DiffusionEstimate& sigma_sq, std::pair<double, double> p_hat) {
  return PluginClassifier([b0](double x) { return b0(x); }, [b1](double x) { return b1(x); },
                          [sigma_sq](double x) { return sigma_sq(x); }, p_hat);
}

PluginClassifier make_plugin_known_sigma(const DriftEstimate& b0, const DriftEstimate& b1,
                                         const CoefficientFn& sigma,
                                         std::pair<double, double> p_hat) {
  return PluginClassifier([b0](double x) { return b0(x); }, [b1](double x) { return b1(x); },
                          [sigma](double x) {
                            const double s = sigma(x);
                            return s * s;
                          },
                          p_hat);
}

PluginClassifier make_plugin(const ConstantModelEstimate& est) {
  const double mu0 = est.mu0_hat;
  const double mu1 = est.mu1_hat;
  const double a2 = est.alpha_sq_tilde;
  return PluginClassifier([mu0](double) { return mu0; }, [mu1](double) { return mu1; },
                          [a2](double) { return a2; }, est.p_hat);
}

PluginClassifier make_bayes(const MixtureModel& model) {
  const CoefficientFn b0 = model.b0();
  const CoefficientFn b1 = model.b1();
  const CoefficientFn sigma = model.sigma_fn();
  return PluginClassifier([b0](double x) { return b0(x); }, [b1](double x) { return b1(x); },
                          [sigma](double x) {
                            const double s = sigma(x);
                            return s * s;
                          },
                          {model.p0(), model.p1()});
}

double empirical_risk(const std::function<int(const Path&)>& classifier, const Dataset& test) {
  if (test.size() < 1) throw ConfigError("empirical_risk: empty test set");
  long errors = 0;
  for (const Path& p : test.paths()) {
    if (!p.label) throw ConfigError("empirical_risk: unlabeled test path");
    if (classifier(p) != *p.label) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(test.size());
}

double excess_risk(const PluginClassifier& plugin, const PluginClassifier& bayes,
                   const Dataset& test) {
  if (test.size() < 1) throw ConfigError("excess_risk: empty test set");
  long diff = 0;
  for (const Path& p : test.paths()) {
    if (!p.label) throw ConfigError("excess_risk: unlabeled test path");
    const int y = *p.label;
    diff += (plugin.classify(p) != y) - (bayes.classify(p) != y);
  }
  return static_cast<double>(diff) / static_cast<double>(test.size());
}

RiskCounts streamed_risks(const PluginClassifier& plugin, const PluginClassifier& bayes,
                          const MixtureModel& model, long test_size, int n, std::uint64_t stream,
                          int substeps) {
  if (test_size < 1) throw ConfigError("streamed_risks: test_size must be >= 1");
  RiskCounts counts;
  for_each_path(model, test_size, n, stream, substeps, [&](long, const Path& p) {
    const int y = *p.label;
    counts.plugin_errors += plugin.classify(p) != y;
    counts.bayes_errors += bayes.classify(p) != y;
  });
  counts.total = test_size;
  return counts;
}

double empirical_norm(const std::function<double(double)>& f,
                      const std::function<double(double)>& g, const Dataset& dataset,
                      std::optional<int> class_filter) {
  double total = 0.0;
  long selected = 0;
  for (const Path& p : dataset.paths()) {
    if (class_filter && (!p.label || *p.label != *class_filter)) continue;
    ++selected;
    double path_sum = 0.0;
    for (int k = 0; k < p.n; ++k) {
      const double d = f(p.values[k]) - g(p.values[k]);
      path_sum += d * d;
    }
    total += path_sum;
  }
  if (selected == 0) throw EmptySelection("empirical_norm: no paths after class filter");
  return std::sqrt(total / (static_cast<double>(selected) * dataset.n()));
}

}  // namespace driftlab

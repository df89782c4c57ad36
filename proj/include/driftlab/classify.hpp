#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "driftlab/errors.hpp"
#include "driftlab/estimators.hpp"
#include "driftlab/mixture_model.hpp"
#include "driftlab/path.hpp"

namespace driftlab {

// Discretized Girsanov statistic
//   sum_k (b/s2)(X_k) (X_{k+1} - X_k) - (dt/2) sum_k (b^2/s2)(X_k)
// with dt = 1/n taken from the path itself. Throws NumericalError when the
// sigma-squared evaluator is non-positive at a visited point.
template <class DriftFn, class SigmaSqFn>
double girsanov_stat(const Path& path, DriftFn&& drift, SigmaSqFn&& sigma_sq) {
  double linear = 0.0;
  double quadratic = 0.0;
  for (int k = 0; k < path.n; ++k) {
    const double x = path.values[k];
    const double s2 = sigma_sq(x);
    if (!(s2 > 0.0)) throw NumericalError("girsanov_stat: non-positive sigma^2 evaluation");
    const double b = drift(x);
    linear += b / s2 * (path.values[k + 1] - path.values[k]);
    quadratic += b * b / s2;
  }
  return linear - 0.5 * path.dt() * quadratic;
}

// Softmax posterior p1 e^{f1} / (p0 e^{f0} + p1 e^{f1}), computed in log
// space so large statistics saturate instead of overflowing. p0 = 0 gives 1,
// p1 = 0 gives 0; both zero is rejected.
double softmax_phi(double f0, double f1, std::pair<double, double> p);

// Plug-in classifier g(X) = 1{Phi(X) >= 1/2} assembled from drift and
// squared-diffusion evaluators plus a prior. The Bayes classifier is the same
// object built from the true model, discretized at the path's resolution so
// both classifiers see identical information.
class PluginClassifier {
 public:
  PluginClassifier(std::function<double(double)> drift0, std::function<double(double)> drift1,
                   std::function<double(double)> sigma_sq, std::pair<double, double> prior);

  // (F_0, F_1) in one pass over the path.
  std::pair<double, double> statistics(const Path& path) const;
  double posterior(const Path& path) const;
  // Ties at posterior 1/2 classify as 1.
  int classify(const Path& path) const;

  const std::pair<double, double>& prior() const { return prior_; }

 private:
  std::function<double(double)> drift0_;
  std::function<double(double)> drift1_;
  std::function<double(double)> sigma_sq_;
  std::pair<double, double> prior_;
};

PluginClassifier make_plugin(const DriftEstimate& b0, const DriftEstimate& b1,
                             const DiffusionEstimate& sigma_sq, std::pair<double, double> p_hat);
// Known-sigma variant: fixed squared-diffusion function.
PluginClassifier make_plugin_known_sigma(const DriftEstimate& b0, const DriftEstimate& b1,
                                         const CoefficientFn& sigma,
                                         std::pair<double, double> p_hat);
PluginClassifier make_plugin(const ConstantModelEstimate& est);
// Exact Bayes classifier from the true model coefficients and prior.
PluginClassifier make_bayes(const MixtureModel& model);

// Fraction of labeled test paths the classifier gets wrong.
double empirical_risk(const std::function<int(const Path&)>& classifier, const Dataset& test);

// empirical_risk(plugin) - empirical_risk(bayes) on the shared test set; may
// be slightly negative by Monte-Carlo noise and is reported as-is.
double excess_risk(const PluginClassifier& plugin, const PluginClassifier& bayes,
                   const Dataset& test);

// Shared-test-set error counts for a plug-in/Bayes pair. The streamed variant
// visits the exact paths generate_dataset(model, test_size, n, stream) would
// produce, so the counts match the materialized route bit for bit while
// keeping one path in memory at a time.
struct RiskCounts {
  long plugin_errors = 0;
  long bayes_errors = 0;
  long total = 0;

  double plugin_risk() const { return static_cast<double>(plugin_errors) / total; }
  double bayes_risk() const { return static_cast<double>(bayes_errors) / total; }
  double excess() const { return static_cast<double>(plugin_errors - bayes_errors) / total; }
};
RiskCounts streamed_risks(const PluginClassifier& plugin, const PluginClassifier& bayes,
                          const MixtureModel& model, long test_size, int n, std::uint64_t stream,
                          int substeps = 1);

// Root mean square of f - g over the sample points X_{jk}, k = 0..n-1, of the
// selected paths.
double empirical_norm(const std::function<double(double)>& f,
                      const std::function<double(double)>& g, const Dataset& dataset,
                      std::optional<int> class_filter = std::nullopt);

}  // namespace driftlab

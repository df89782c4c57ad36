#include "driftlab/mixture_model.hpp"

#include <cmath>

#include "driftlab/errors.hpp"

namespace driftlab {

MixtureModel MixtureModel::create(CoefficientFn b0, CoefficientFn b1, CoefficientFn sigma,
                                  double p0, double p1, double x0, double check_half_width) {
  if (!(p0 > 0.0 && p0 < 1.0) || !(p1 > 0.0 && p1 < 1.0))
    throw ConfigError("mixture model: p0 and p1 must lie in (0,1)");
  if (std::abs(p0 + p1 - 1.0) > 1e-12) throw ConfigError("mixture model: p0 + p1 must equal 1");
  if (!std::isfinite(x0)) throw ConfigError("mixture model: x0 must be finite");

  const int grid = 4001;
  double sigma_min = sigma(0.0);
  for (int i = 0; i < grid; ++i) {
    const double x = -check_half_width + 2.0 * check_half_width * i / (grid - 1);
    sigma_min = std::min(sigma_min, sigma(x));
  }
  if (!(sigma_min > 0.0))
    throw ConfigError("mixture model: sigma must be uniformly positive on the evaluation range");

  return MixtureModel(std::move(b0), std::move(b1), std::move(sigma), p0, p1, x0, sigma_min);
}

int sample_label(double p0, Rng& rng) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw ConfigError("sample_label: p0 must lie in (0,1)");
  return rng.next_uniform() < p0 ? 0 : 1;
}

}  // namespace driftlab

#include "driftlab/simulate.hpp"

#include <cmath>
#include <string>
#include <mutex>
#include <thread>
#include <vector>

#include "driftlab/errors.hpp"

namespace driftlab {

Path euler_maruyama(const MixtureModel& model, int label, int n, Rng& rng, int substeps) {
  if (n < 1) throw ConfigError("euler_maruyama: n must be >= 1");
  if (substeps < 1) throw ConfigError("euler_maruyama: substeps must be >= 1");
  if (label != 0 && label != 1) throw ConfigError("euler_maruyama: label must be 0 or 1");

  const CoefficientFn& drift = model.drift(label);
  const CoefficientFn& sigma = model.sigma_fn();
  const double dt = 1.0 / (static_cast<double>(n) * substeps);
  const double sqrt_dt = std::sqrt(dt);

  Path path;
  path.n = n;
  path.label = label;
  path.values.resize(n + 1);
  double x = model.x0();
  path.values[0] = x;
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < substeps; ++s) {
      x += drift(x) * dt + sigma(x) * sqrt_dt * rng.next_normal();
    }
    if (!std::isfinite(x))
      throw NumericalError("euler_maruyama: non-finite state at step " + std::to_string(k + 1) +
                           " (mis-specified model?)");
    path.values[k + 1] = x;
  }
  return path;
}

Dataset generate_dataset(const MixtureModel& model, long total, int n, std::uint64_t stream,
                         int substeps, int threads) {
  if (total < 1) throw ConfigError("generate_dataset: N must be >= 1");

  std::vector<Path> paths(total);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_range = [&](long begin, long end) {
    try {
      for (long j = begin; j < end; ++j) {
        Rng rng(derive_stream(stream, {static_cast<std::uint64_t>(j)}));
        const int label = sample_label(model.p0(), rng);
        try {
          paths[j] = euler_maruyama(model, label, n, rng, substeps);
        } catch (const NumericalError& e) {
          throw NumericalError(std::string(e.what()) + " [path " + std::to_string(j) + "]");
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (threads <= 1 || total < 2 * threads) {
    run_range(0, total);
  } else {
    std::vector<std::thread> pool;
    const long chunk = (total + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const long begin = t * chunk;
      const long end = std::min(total, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return Dataset(std::move(paths));
}

}  // namespace driftlab

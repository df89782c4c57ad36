#include "driftlab/hypothesis.hpp"

#include <cmath>
#include <string>

#include "driftlab/errors.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw ConfigError("hamming_distance: length mismatch");
  int d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

HypothesisFamily build_hypothesis_family(double beta, double holder_radius, double c0,
                                         long size_ref, int count, double kappa,
                                         std::uint64_t seed, int attempts_per_member) {
  if (!(beta >= 1.0)) throw ConfigError("hypothesis family: beta must be >= 1");
  if (!(holder_radius > 0.0)) throw ConfigError("hypothesis family: R must be positive");
  if (!(c0 > 0.0)) throw ConfigError("hypothesis family: c0 must be positive");
  if (count < 1) throw ConfigError("hypothesis family: count must be >= 1");
  if (size_ref < 1) throw ConfigError("hypothesis family: N must be >= 1");

  HypothesisFamily family;
  family.beta = beta;
  family.holder_radius = holder_radius;
  family.c0 = c0;
  family.kappa = kappa;
  family.size_ref = size_ref;
  family.m = static_cast<int>(
      std::ceil(c0 * std::pow(static_cast<double>(size_ref), 1.0 / (2.0 * beta + 1.0))));
  if (family.m < 8)
    throw ConfigError("hypothesis family: m = " + std::to_string(family.m) +
                      " < 8; increase N or c0 (need N >= (7/c0)^(2 beta + 1))");
  family.h = 1.0 / family.m;
  family.base = kappa * std::pow(family.h, beta);

  const int min_distance_times_8 = family.m;  // rho >= m/8  <=>  8 rho >= m
  family.selections.push_back(std::vector<std::uint8_t>(family.m, 0));

  Rng rng(derive_stream(seed, {hash_tag("hypothesis")}));
  long attempts = 0;
  const long budget = static_cast<long>(attempts_per_member) * count;
  while (static_cast<int>(family.selections.size()) < count) {
    if (++attempts > budget)
      throw NumericalError("hypothesis family: greedy selection exhausted its retry budget");
    std::vector<std::uint8_t> w(family.m);
    for (int i = 0; i < family.m; ++i) w[i] = rng.next_u64() & 1u;
    bool keep = true;
    for (const auto& kept : family.selections) {
      if (8 * hamming_distance(w, kept) < min_distance_times_8) {
        keep = false;
        break;
      }
    }
    if (keep) family.selections.push_back(std::move(w));
  }

  for (const auto& w : family.selections) {
    family.members.push_back(
        CoefficientFn::bump_sum(family.base, family.h, beta, holder_radius, w));
  }
  return family;
}

}  // namespace driftlab

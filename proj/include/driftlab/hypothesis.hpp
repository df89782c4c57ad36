#pragma once

#include <cstdint>
#include <vector>

#include "driftlab/coefficients.hpp"

namespace driftlab {

// Well-separated family of bump-sum drifts used for adversarial probing:
// m = ceil(c0 N^{1/(2 beta+1)}) disjoint bumps on (-1,1), member selections
// kept pairwise at Hamming distance >= m/8 (Varshamov-Gilbert style).
struct HypothesisFamily {
  double beta = 1.0;
  double holder_radius = 1.0;  // R
  double c0 = 1.0;
  double kappa = 1.0;
  long size_ref = 0;  // N used to pick m
  int m = 0;
  double h = 0.0;  // 1/m
  double base = 0.0;  // kappa h^beta
  std::vector<std::vector<std::uint8_t>> selections;  // selections[0] is all zeros
  std::vector<CoefficientFn> members;
};

int hamming_distance(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

// Greedy selection: starts from the all-zero member and keeps random bit
// vectors only when they stay at Hamming distance >= m/8 from everything
// already retained. Requires m >= 8; throws NumericalError if the retry
// budget is exhausted before reaching `count` members.
HypothesisFamily build_hypothesis_family(double beta, double holder_radius, double c0, long size_ref,
                                         int count, double kappa, std::uint64_t seed,
                                         int attempts_per_member = 4000);

}  // namespace driftlab

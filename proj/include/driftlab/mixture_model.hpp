#pragma once

#include "driftlab/coefficients.hpp"
#include "driftlab/rng.hpp"

namespace driftlab {

// Data-generating process dX_t = b_Y(X_t) dt + sigma(X_t) dW_t on [0,1] with
// label Y ~ (p0, p1). Immutable after construction; evaluation is pure.
class MixtureModel {
 public:
  // Validates p0, p1 in (0,1) with p0 + p1 = 1 and checks that sigma is
  // positive on a dense grid over [-check_half_width, check_half_width].
  static MixtureModel create(CoefficientFn b0, CoefficientFn b1, CoefficientFn sigma, double p0,
                             double p1, double x0 = 0.0, double check_half_width = 10.0);

  const CoefficientFn& drift(int label) const { return label == 0 ? b0_ : b1_; }
  const CoefficientFn& b0() const { return b0_; }
  const CoefficientFn& b1() const { return b1_; }
  const CoefficientFn& sigma_fn() const { return sigma_; }
  double sigma(double x) const { return sigma_(x); }
  double sigma_sq(double x) const {
    const double s = sigma_(x);
    return s * s;
  }
  double p0() const { return p0_; }
  double p1() const { return p1_; }
  double x0() const { return x0_; }
  double sigma_grid_min() const { return sigma_grid_min_; }
  bool all_constant() const {
    return b0_.is_constant() && b1_.is_constant() && sigma_.is_constant();
  }

 private:
  MixtureModel(CoefficientFn b0, CoefficientFn b1, CoefficientFn sigma, double p0, double p1,
               double x0, double sigma_grid_min)
      : b0_(std::move(b0)),
        b1_(std::move(b1)),
        sigma_(std::move(sigma)),
        p0_(p0),
        p1_(p1),
        x0_(x0),
        sigma_grid_min_(sigma_grid_min) {}

  CoefficientFn b0_;
  CoefficientFn b1_;
  CoefficientFn sigma_;
  double p0_;
  double p1_;
  double x0_;
  double sigma_grid_min_;
};

// Draws 0 with probability p0, 1 otherwise. Rejects p0 outside (0,1).
int sample_label(double p0, Rng& rng);

}  // namespace driftlab

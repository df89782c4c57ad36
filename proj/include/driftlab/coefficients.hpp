#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace driftlab {

// Compactly supported C^inf bump, sup = 1/2 at u = 0, positive exactly on
// (-1/2, 1/2).
double bump_kernel(double u);

// Closed family of scalar coefficient functions. The family is enumerated
// (not arbitrary callables) so that estimation targets stay exactly
// evaluable and model configs stay serializable.
class CoefficientFn {
 public:
  enum class Kind {
    kConstant,      // x -> c
    kRationalBump,  // x -> 1/(1+x^2)
    kGaussianBump,  // x -> x exp(-x^2)
    kCosineSigma,   // x -> sqrt(2/3) + (sqrt(6)-2)/(2 sqrt(6)) (1 + cos x)
    kAffine,        // x -> slope x + intercept
    kBumpSum,       // base plus a selection of m disjoint scaled bumps on (-1,1)
  };

  static CoefficientFn constant(double c);
  static CoefficientFn rational_bump();
  static CoefficientFn gaussian_bump();
  static CoefficientFn cosine_sigma();
  static CoefficientFn affine(double slope, double intercept);
  // base + sum_k bits[k] * 2 R h^beta K((u - (k+1/2)h)/h) with u = (x+1)/2,
  // so each selected bump lives on (k h, (k+1) h) in u, i.e. inside (-1, 1)
  // in x. Requires bits.size() * h <= 1.
  static CoefficientFn bump_sum(double base, double h, double holder_beta, double holder_radius,
                                std::vector<std::uint8_t> bits);

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::kConstant; }
  double constant_value() const { return constant_; }
  double affine_slope() const { return slope_; }
  double affine_intercept() const { return intercept_; }
  double bump_base() const { return base_; }
  double bump_h() const { return width_; }
  double bump_beta() const { return smoothness_; }
  double bump_radius() const { return radius_; }
  const std::vector<std::uint8_t>& bump_bits() const { return bits_; }

  std::string describe() const;

 private:
  CoefficientFn() = default;

  Kind kind_ = Kind::kConstant;
  double constant_ = 0.0;
  double slope_ = 0.0;
  double intercept_ = 0.0;
  double base_ = 0.0;
  double width_ = 0.0;       // h
  double smoothness_ = 1.0;  // beta
  double radius_ = 1.0;      // R
  double amplitude_ = 0.0;   // 2 R h^beta, precomputed
  std::vector<std::uint8_t> bits_;
};

}  // namespace driftlab

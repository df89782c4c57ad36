#include "driftlab/coefficients.hpp"

#include <cmath>

#include "driftlab/errors.hpp"

namespace driftlab {

double bump_kernel(double u) {
  const double t = 1.0 - 4.0 * u * u;
  if (t <= 0.0) return 0.0;
  return 0.5 * std::exp(1.0 - 1.0 / t);
}

CoefficientFn CoefficientFn::constant(double c) {
  CoefficientFn f;
  f.kind_ = Kind::kConstant;
  f.constant_ = c;
  return f;
}

CoefficientFn CoefficientFn::rational_bump() {
  CoefficientFn f;
  f.kind_ = Kind::kRationalBump;
  return f;
}

CoefficientFn CoefficientFn::gaussian_bump() {
  CoefficientFn f;
  f.kind_ = Kind::kGaussianBump;
  return f;
}

CoefficientFn CoefficientFn::cosine_sigma() {
  CoefficientFn f;
  f.kind_ = Kind::kCosineSigma;
  return f;
}

CoefficientFn CoefficientFn::affine(double slope, double intercept) {
  CoefficientFn f;
  f.kind_ = Kind::kAffine;
  f.slope_ = slope;
  f.intercept_ = intercept;
  return f;
}

CoefficientFn CoefficientFn::bump_sum(double base, double h, double holder_beta,
                                      double holder_radius, std::vector<std::uint8_t> bits) {
  if (!(h > 0.0)) throw ConfigError("bump_sum: h must be positive");
  if (!(holder_beta >= 1.0)) throw ConfigError("bump_sum: beta must be >= 1");
  if (!(holder_radius > 0.0)) throw ConfigError("bump_sum: R must be positive");
  if (bits.empty()) throw ConfigError("bump_sum: empty bit vector");
  if (static_cast<double>(bits.size()) * h > 1.0 + 1e-12)
    throw ConfigError("bump_sum: m*h exceeds 1, bumps would leave (-1,1)");
  CoefficientFn f;
  f.kind_ = Kind::kBumpSum;
  f.base_ = base;
  f.width_ = h;
  f.smoothness_ = holder_beta;
  f.radius_ = holder_radius;
  f.amplitude_ = 2.0 * holder_radius * std::pow(h, holder_beta);
  f.bits_ = std::move(bits);
  return f;
}

double CoefficientFn::operator()(double x) const {
  switch (kind_) {
    case Kind::kConstant:
      return constant_;
    case Kind::kRationalBump:
      return 1.0 / (1.0 + x * x);
    case Kind::kGaussianBump:
      return x * std::exp(-x * x);
    case Kind::kCosineSigma: {
      static const double lo = std::sqrt(2.0 / 3.0);
      static const double amp = (std::sqrt(6.0) - 2.0) / (2.0 * std::sqrt(6.0));
      return lo + amp * (1.0 + std::cos(x));
    }
    case Kind::kAffine:
      return slope_ * x + intercept_;
    case Kind::kBumpSum: {
      const double u = 0.5 * (x + 1.0);
      if (u <= 0.0 || u >= 1.0) return base_;
      const auto cell = static_cast<long>(u / width_);  // bumps have disjoint supports
      if (cell < 0 || cell >= static_cast<long>(bits_.size()) || !bits_[cell]) return base_;
      const double center = (static_cast<double>(cell) + 0.5) * width_;
      return base_ + amplitude_ * bump_kernel((u - center) / width_);
    }
  }
  return 0.0;
}

std::string CoefficientFn::describe() const {
  switch (kind_) {
    case Kind::kConstant:
      return "constant(" + std::to_string(constant_) + ")";
    case Kind::kRationalBump:
      return "rational_bump";
    case Kind::kGaussianBump:
      return "gaussian_bump";
    case Kind::kCosineSigma:
      return "cosine_sigma";
    case Kind::kAffine:
      return "affine(" + std::to_string(slope_) + ", " + std::to_string(intercept_) + ")";
    case Kind::kBumpSum:
      return "bump_sum(m=" + std::to_string(bits_.size()) + ")";
  }
  return "?";
}

}  // namespace driftlab

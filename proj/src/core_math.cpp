#include "kaf/core_math.hpp"

#include <cmath>

#include "kaf/simd.hpp"

namespace kaf {

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: x must be > 0");
  if (x > 171.0) throw std::domain_error("gamma_fn: overflow for x > 171");
  return std::tgamma(x);
}

double ggd_density(double e, const GGDParams& p) {
  return GGDEvaluator(p)(e);
}

GGDEvaluator::GGDEvaluator(const GGDParams& p)
    : alpha_(p.alpha),
      coef_(p.alpha / (2.0 * p.beta * gamma_fn(1.0 / p.alpha))),
      inv_beta_alpha_(std::pow(p.beta, -p.alpha)) {}

double GGDEvaluator::operator()(double e) const {
  const double a = std::abs(e);
  if (a == 0.0) return coef_;
  return coef_ * std::exp(-std::pow(a, alpha_) * inv_beta_alpha_);
}

double gauss_fn(double e, double sigma) {
  const double s = kInvSqrt2Pi / sigma;
  return s * std::exp(-e * e / (2.0 * sigma * sigma));
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       const KernelParams& k) {
  if (x.size() != y.size())
    throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  const double s = kInvSqrt2Pi / k.sigma;
  return s * std::exp(-d2 / (2.0 * k.sigma * k.sigma));
}

} // namespace kaf

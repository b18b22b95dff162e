#pragma once
// Scalar special functions, the generalized Gaussian density and the
// Gaussian kernel.  Everything here is a pure function of its inputs.

#include <span>
#include <stdexcept>

namespace kaf {

// Shape/scale parameters of the generalized Gaussian density.
struct GGDParams {
  double alpha;
  double beta;

  GGDParams(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("GGDParams: alpha and beta must be > 0");
  }
};

// Gaussian kernel bandwidth (distinct from the MEE criterion bandwidth).
struct KernelParams {
  double sigma;

  explicit KernelParams(double s) : sigma(s) {
    if (!(s > 0.0))
      throw std::invalid_argument("KernelParams: sigma must be > 0");
  }
};

// Gamma function; domain (0, 171] to stay clear of overflow.
// Relative error <= 1e-12 on (0, 50].
double gamma_fn(double x);

// G_{alpha,beta}(e) = alpha/(2 beta Gamma(1/alpha)) * exp(-|e|^alpha / beta^alpha)
double ggd_density(double e, const GGDParams& p);

// Precomputed form of the density for hot loops: the normalization constant
// and beta^-alpha are fixed per parameter set.
class GGDEvaluator {
 public:
  explicit GGDEvaluator(const GGDParams& p);

  double operator()(double e) const;
  double peak() const { return coef_; }  // value at e = 0, the global bound
  double alpha() const { return alpha_; }
  double inv_beta_alpha() const { return inv_beta_alpha_; }

 private:
  double alpha_;
  double coef_;            // alpha/(2 beta Gamma(1/alpha))
  double inv_beta_alpha_;  // beta^-alpha
};

// Gaussian function G_sigma(e) = 1/(sqrt(2 pi) sigma) exp(-e^2/(2 sigma^2)),
// the alpha=2 criterion kernel and the scalar form of the RKHS kernel below.
double gauss_fn(double e, double sigma);

// kappa(x, y) = 1/(sqrt(2 pi) sigma) exp(-||x-y||^2/(2 sigma^2)).
// Note the non-unit peak: kappa(u, u) = 1/(sqrt(2 pi) sigma).
double gaussian_kernel(std::span<const double> x, std::span<const double> y,
                       const KernelParams& k);

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

} // namespace kaf

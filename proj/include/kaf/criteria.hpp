#pragma once
// Information-potential estimators (plain, quantized, QMEE), the per-sample
// theta weights and effective desired values used by the recursions, and the
// batch QGMEE regression fixed point.  All operations are pure given their
// inputs; a Codebook is passed by reference and only read.

#include <span>
#include <vector>

#include "kaf/core_math.hpp"
#include "kaf/quantizer.hpp"

namespace kaf {

enum class CriterionVariant { gmee, mee };

// How the forgetting factor enters the theta sum: the literal lambda^(i+h)
// with h the 1-based codeword index, or lambda^i only.
enum class LambdaIndexMode { literal, time_only };

struct CriterionParams {
  GGDParams ggd;          // alpha, beta for GMEE variants
  double mee_sigma;       // Gaussian bandwidth for MEE variants
  double lambda;          // exponential forgetting factor, (0, 1]
  int window_len;         // Parzen window length L
  LambdaIndexMode lambda_index_mode = LambdaIndexMode::literal;

  CriterionParams(GGDParams g, double sigma, double lam, int len)
      : ggd(g), mee_sigma(sigma), lambda(lam), window_len(len) {
    if (!(sigma > 0.0))
      throw std::invalid_argument("CriterionParams: mee_sigma must be > 0");
    if (!(lam > 0.0) || lam > 1.0)
      throw std::invalid_argument("CriterionParams: lambda must be in (0, 1]");
    if (len < 1)
      throw std::invalid_argument("CriterionParams: window_len must be >= 1");
  }
};

// Distance clamp for the |e - c|^(alpha-2) factor when alpha < 2.
inline constexpr double kSingularEps = 1e-8;

// (1/L^2) sum_i sum_j G_{a,b}(e_i - e_j)
double empirical_ip(std::span<const double> errors, const GGDParams& p);

// (1/L^2) sum_i sum_h H_h G_{a,b}(e_i - c_h); requires sum_h H_h == L.
double quantized_ip(std::span<const double> errors, const Codebook& cb,
                    const GGDParams& p);

// Same with the Gaussian function G_sigma.
double qmee_ip(std::span<const double> errors, const Codebook& cb,
               double sigma);

// First-order large-beta expansion of quantized_ip (test oracle).
double large_beta_ip_approx(std::span<const double> errors, const Codebook& cb,
                            const GGDParams& p);

struct ThetaResult {
  double theta;    // strictly positive
  bool singular;   // some |e - c_h| hit the kSingularEps clamp (alpha < 2)
};

// theta = sum_h lambda^(L+h) H_h G(e - c_h) |e - c_h|^(alpha-2)   (GMEE)
//       = sum_h lambda^(L+h) H_h G_sigma(e - c_h)                 (MEE)
// time_index is the L in the exponent (the window position of e).
ThetaResult theta_weight(double e, const Codebook& cb,
                         const CriterionParams& cp, int time_index,
                         CriterionVariant variant);

// Effective desired: d~ = [sum_h kappa_h (d - c_h)] / theta with kappa_h the
// theta summands, so that theta * d~ reproduces the gradient's desired term.
double effective_desired(double d, double e, const Codebook& cb,
                         const CriterionParams& cp, int time_index,
                         CriterionVariant variant);

// Fused form used by the filter hot loop; computes both in one pass.
struct ThetaDesired {
  double theta;
  double dtilde;
  bool singular;
};
ThetaDesired theta_and_desired(double d, double e, const Codebook& cb,
                               const CriterionParams& cp, int time_index,
                               CriterionVariant variant);

// M and N of the batch QGMEE optimum w = N^-1 M, evaluated at the given w
// (errors e_i = d_i - w^T u_i).
struct QgmeeSystem {
  std::vector<double> m;           // length dim
  std::vector<double> n;           // dim x dim, row-major
};
QgmeeSystem qgmee_system(std::span<const double> w,
                         const std::vector<std::vector<double>>& inputs,
                         std::span<const double> desired, const Codebook& cb,
                         const GGDParams& p);

// Literal gradient of the QGMEE cost at w, (alpha/(L^2 beta^alpha))(M - N w).
std::vector<double> qgmee_gradient(std::span<const double> w,
                                   const std::vector<std::vector<double>>& inputs,
                                   std::span<const double> desired,
                                   const Codebook& cb, const GGDParams& p);

// Self-consistent solution of N(w) w = M(w), iterated until the residual
// ||M - N w|| <= 1e-10 ||M||.  A tiny ridge is added when the condition
// estimate of N exceeds 1e12.
std::vector<double> batch_qgmee_fixed_point(
    const std::vector<std::vector<double>>& inputs,
    std::span<const double> desired, const Codebook& cb, const GGDParams& p);

} // namespace kaf

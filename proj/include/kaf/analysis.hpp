#pragma once
// Theoretical-claim checkers (mean-error convergence on an explicit-feature
// toy, Lyapunov steady-state covariance) and the complexity accounting of
// the criterion computation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kaf/criteria.hpp"
#include "kaf/filters.hpp"
#include "kaf/linalg.hpp"

namespace kaf {

// Largest eigenvalue magnitude.  Power iteration (tolerance 1e-10, at most
// 1e4 iterations); falls back to the dense solver for m <= 64 when the
// iteration does not settle (complex dominant pair).  Throws with the last
// residual if neither route applies.
double spectral_radius(const Mat& r);

struct LyapunovSystem {
  Mat r;   // I - alpha_n phi_n^T in steady state
  Mat xi;  // alpha_n E[v^2] alpha_n^T, symmetric PSD

  LyapunovSystem(Mat r_, Mat xi_);
};

// Closed form vec(T) = (I - R (x) R)^-1 vec(Xi); requires rho(R) < 1.
Mat lyapunov_steady_state(const LyapunovSystem& sys);

// Per-iteration operation counts of the criterion-weight computation.
OpCounters theta_cost(int l, int h, FilterVariant variant);

enum class CriterionFamily { mee, gmee };

// Complexity difference between the unquantized and quantized recursions:
// MEE: 15L - 14 - 16H; GMEE: 19L - 18 - 20H.
std::int64_t complexity_delta(int l, int h, CriterionFamily family);

struct ComplexityReport {
  std::int64_t mults = 0;
  std::int64_t adds = 0;
  std::int64_t exps = 0;
  double wall_seconds = 0.0;
  double h_mean = 0.0;
  int l = 0;
};

struct MeanErrorConfig {
  int feature_dim = 8;   // m <= 20
  int steps = 200;
  int mc_runs = 200;
  double noise_std = 0.0;
  double reg = 1e-3;
  std::uint64_t seed = 1;
  int smooth_block = 10;
  // When set, the recursion uses the QGMEE theta/effective-desired weights
  // over a sliding window; otherwise theta = 1 (plain RLS form).
  std::optional<CriterionParams> criterion;
  double gamma = 0.0;
};

struct MeanErrorReport {
  double spectral_radius = 0.0;   // of I - E[alpha phi^T]
  std::vector<double> block_norms;  // smoothed ||E[eps_n]||
  double initial_norm = 0.0;
  double final_norm = 0.0;
  bool pass = false;
  std::string verdict;
  Mat r_estimate;     // I - E[alpha phi^T]
  Mat alpha_outer;    // E[alpha alpha^T], feeds the Lyapunov noise term

  void write_kv(std::ostream& os) const;  // key=value lines
};

MeanErrorReport empirical_mean_error_check(const MeanErrorConfig& cfg);

} // namespace kaf

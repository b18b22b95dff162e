#pragma once
// Recursive kernel filter engines: KRLS, QKRGMEE, QKRMEE and their gamma=0
// reductions KRGMEE/KRMEE.  A KernelFilter is exclusively owned by one
// sequential update loop; independent Monte Carlo runs each build their own.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kaf/core_math.hpp"
#include "kaf/criteria.hpp"
#include "kaf/quantizer.hpp"

namespace kaf {

enum class FilterVariant { krls, krmee, krgmee, qkrmee, qkrgmee };

const char* variant_name(FilterVariant v);
FilterVariant variant_from_name(const std::string& name);

// Whether the sliding-window codebook is maintained incrementally
// (insert new / remove expired) or rebuilt from the window every step.
enum class CodebookMode { incremental, rebuild };

struct FilterConfig {
  FilterVariant variant;
  KernelParams kernel;
  CriterionParams criterion;
  double gamma;  // quantization threshold; the unquantized variants force 0
  double reg;    // regularization vartheta_2
  CodebookMode codebook_mode = CodebookMode::incremental;

  FilterConfig(FilterVariant v, KernelParams k, CriterionParams c,
               double gamma_, double reg_)
      : variant(v), kernel(k), criterion(c), gamma(gamma_), reg(reg_) {
    if (!(gamma >= 0.0))
      throw std::invalid_argument("FilterConfig: gamma must be >= 0");
    if (!(reg > 0.0))
      throw std::invalid_argument("FilterConfig: reg must be > 0");
    // KRMEE == QKRMEE(gamma=0), KRGMEE == QKRGMEE(gamma=0) by construction
    if (variant == FilterVariant::krmee || variant == FilterVariant::krgmee ||
        variant == FilterVariant::krls)
      gamma = 0.0;
  }

  bool uses_criterion() const { return variant != FilterVariant::krls; }
  CriterionVariant criterion_variant() const {
    return (variant == FilterVariant::krmee || variant == FilterVariant::qkrmee)
               ? CriterionVariant::mee
               : CriterionVariant::gmee;
  }
  // Ridge scale S so that the per-sample ridge is S*reg/theta:
  // beta^alpha for the GMEE family, 2 sigma^2 for the MEE family
  // (vartheta_{2;S} = alpha*vartheta_2), 1 for KRLS.
  double ridge_scale() const;
};

// Sliding Parzen window plus codebook, shared between the recursive filter
// and the batch replay so the two cannot drift apart.
class ErrorWindow {
 public:
  ErrorWindow(double gamma, int window_len, CodebookMode mode);

  // Insert the newest error, evict the oldest once the window exceeds its
  // length, and keep stored codeword indices consistent with removals.
  void push(double e);

  const Codebook& codebook() const { return cb_; }
  int size() const { return static_cast<int>(entries_.size()); }
  std::vector<double> errors() const;

 private:
  double gamma_;
  std::size_t window_len_;
  CodebookMode mode_;
  Codebook cb_;
  struct Entry {
    double error;
    std::size_t cw_index;
  };
  std::vector<Entry> entries_;  // FIFO, oldest first
};

// Per-iteration operation counts of the criterion computation.
struct OpCounters {
  std::int64_t mults = 0;
  std::int64_t adds = 0;
  std::int64_t exps = 0;
};

class KernelFilter {
 public:
  // Initialization from the first sample: Q1 = 1/(S*reg + kappa(u1,u1)),
  // A1 = Q1*d1.
  KernelFilter(std::span<const double> u1, double d1, const FilterConfig& cfg);

  // y = sum_j A_j kappa(u, u_j); no state mutation.
  double predict(std::span<const double> u) const;

  // One recursion step; dictionary, A and Q each grow by one.
  void update(std::span<const double> u, double d);

  std::size_t size() const { return a_.size(); }
  std::size_t dim() const { return dim_; }
  const FilterConfig& config() const { return cfg_; }
  std::span<const double> coeffs() const { return a_; }
  std::vector<double> dictionary_point(std::size_t j) const;

  // kappa(u, u_j) for every dictionary point, out must hold size() values.
  void kernel_row(std::span<const double> u, double* out) const;

  // Full symmetric Q (reconstructed from the lower triangle).
  std::vector<double> q_full() const;

  const Codebook& codebook() const { return window_.codebook(); }
  int window_size() const { return window_.size(); }

  // Per-step traces of the frozen recursion weights (step 0 is the init
  // sample with theta = 1, dtilde = d1).
  std::span<const double> theta_trace() const { return theta_trace_; }
  std::span<const double> dtilde_trace() const { return dtilde_trace_; }
  std::span<const double> error_trace() const { return error_trace_; }

  // Instrumentation.
  std::int64_t singular_events() const { return singular_events_; }
  double criterion_seconds() const { return criterion_ns_ * 1e-9; }
  const OpCounters& counters() const { return counters_; }
  double h_mean() const;  // mean codebook size over updates

  // Structured-text state snapshot (documented in README).
  void write_snapshot(std::ostream& os) const;

 private:
  void grow_dictionary(std::span<const double> u);

  FilterConfig cfg_;
  std::size_t dim_;
  double ridge_;       // S * reg
  double kappa_self_;  // kappa(u,u) = 1/(sqrt(2 pi) sigma)
  double neg_inv_2s2_; // -1/(2 sigma^2)

  // dictionary, column-major with row stride dcap_
  std::vector<double> dict_;
  std::size_t dcap_ = 0;

  std::vector<double> a_;

  // lower triangle of Q, row-major with stride qcap_
  std::vector<double> qlo_;
  std::size_t qcap_ = 0;

  ErrorWindow window_;

  std::vector<double> theta_trace_, dtilde_trace_, error_trace_;
  mutable std::vector<double> scratch_dist_, scratch_h_;
  std::vector<double> scratch_z_;

  std::int64_t singular_events_ = 0;
  std::int64_t criterion_ns_ = 0;
  OpCounters counters_;
  std::int64_t h_sum_ = 0;
  std::int64_t h_samples_ = 0;
};

// Snapshot reader for round-trips and cross-implementation comparison.
struct FilterSnapshot {
  std::string variant;
  std::size_t dim = 0;
  std::size_t n = 0;
  double sigma = 0.0;
  double gamma = 0.0;
  std::vector<double> dictionary;  // n rows of dim values, row-major
  std::vector<double> a;
  std::vector<double> q;           // n x n, row-major
  std::vector<double> codewords;
  std::vector<std::size_t> counts;
};
FilterSnapshot read_snapshot(std::istream& is);

// Closed-form coefficients over the given inputs with frozen per-step
// weights: solves (K + S*reg*diag(1/theta)) A = dtilde.
std::vector<double> batch_solve_frozen(
    const std::vector<std::vector<double>>& inputs,
    std::span<const double> dtilde, std::span<const double> theta,
    const FilterConfig& cfg);

// Spec-shaped form: errors_for_weights[i-1] is the prior error of sample i
// (the init sample has no error); the window/codebook discipline is replayed
// over them to freeze theta_i and dtilde_i, then the system is solved.
std::vector<double> batch_solve(const std::vector<std::vector<double>>& inputs,
                                std::span<const double> desired,
                                std::span<const double> errors_for_weights,
                                const FilterConfig& cfg);

} // namespace kaf

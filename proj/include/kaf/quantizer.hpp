#pragma once
// Online vector quantization of scalar error samples: codewords with counts
// under a distance threshold gamma.  A Codebook is a value owned by exactly
// one filter instance; distinct codebooks may be used concurrently.

#include <cstddef>
#include <span>
#include <vector>

namespace kaf {

class Codebook {
 public:
  explicit Codebook(double gamma = 0.0);

  // Direct construction from codewords and counts (interop and oracles; the
  // online insertion rule is not re-checked).
  static Codebook from_parts(std::vector<double> codewords,
                             std::vector<std::size_t> counts, double gamma);

  // Nearest-codeword rule: if the codebook is non-empty and
  // min_h |e - c_h| <= gamma, increment that codeword's count (ties go to the
  // lower index) and return its index; otherwise append e as a new codeword
  // with count 1.  Codeword values never move once created.
  std::size_t insert(double e);

  // Decrement a count; the codeword is removed entirely when it reaches zero
  // (later indices shift down by one).  Returns true if it was removed.
  bool remove(std::size_t index);

  std::size_t size() const { return codewords_.size(); }
  bool empty() const { return codewords_.empty(); }
  double gamma() const { return gamma_; }
  // Total number of quantized samples, sum_h H_h.
  std::size_t total_count() const { return total_; }

  double codeword(std::size_t h) const { return codewords_[h]; }
  std::size_t count(std::size_t h) const { return counts_[h]; }
  std::span<const double> codewords() const { return codewords_; }
  std::span<const std::size_t> counts() const { return counts_; }

  bool operator==(const Codebook& other) const = default;

 private:
  double gamma_;
  std::vector<double> codewords_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

// Batch form: fold insert over the errors in order, starting empty.
Codebook build_codebook(std::span<const double> errors, double gamma);

} // namespace kaf

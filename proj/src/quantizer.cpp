#include "kaf/quantizer.hpp"

#include <cmath>
#include <stdexcept>

namespace kaf {

Codebook::Codebook(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0))
    throw std::invalid_argument("Codebook: gamma must be >= 0");
}

Codebook Codebook::from_parts(std::vector<double> codewords,
                              std::vector<std::size_t> counts, double gamma) {
  if (codewords.size() != counts.size())
    throw std::invalid_argument("Codebook::from_parts: size mismatch");
  Codebook cb(gamma);
  cb.codewords_ = std::move(codewords);
  cb.counts_ = std::move(counts);
  for (std::size_t c : cb.counts_) {
    if (c == 0)
      throw std::invalid_argument("Codebook::from_parts: zero count");
    cb.total_ += c;
  }
  return cb;
}

std::size_t Codebook::insert(double e) {
  std::size_t best = codewords_.size();
  double best_dist = 0.0;
  for (std::size_t h = 0; h < codewords_.size(); ++h) {
    const double d = std::abs(e - codewords_[h]);
    if (best == codewords_.size() || d < best_dist) {
      best = h;
      best_dist = d;
    }
  }
  ++total_;
  if (best < codewords_.size() && best_dist <= gamma_) {
    ++counts_[best];
    return best;
  }
  codewords_.push_back(e);
  counts_.push_back(1);
  return codewords_.size() - 1;
}

bool Codebook::remove(std::size_t index) {
  if (index >= codewords_.size())
    throw std::out_of_range("Codebook::remove: index out of range");
  --total_;
  if (--counts_[index] == 0) {
    codewords_.erase(codewords_.begin() + static_cast<std::ptrdiff_t>(index));
    counts_.erase(counts_.begin() + static_cast<std::ptrdiff_t>(index));
    return true;
  }
  return false;
}

Codebook build_codebook(std::span<const double> errors, double gamma) {
  Codebook cb(gamma);
  for (double e : errors) cb.insert(e);
  return cb;
}

} // namespace kaf

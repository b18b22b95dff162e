#include "kaf/filters.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kaf/linalg.hpp"
#include "kaf/simd.hpp"

namespace kaf {

const char* variant_name(FilterVariant v) {
  switch (v) {
    case FilterVariant::krls: return "KRLS";
    case FilterVariant::krmee: return "KRMEE";
    case FilterVariant::krgmee: return "KRGMEE";
    case FilterVariant::qkrmee: return "QKRMEE";
    case FilterVariant::qkrgmee: return "QKRGMEE";
  }
  return "?";
}

FilterVariant variant_from_name(const std::string& name) {
  if (name == "KRLS") return FilterVariant::krls;
  if (name == "KRMEE") return FilterVariant::krmee;
  if (name == "KRGMEE") return FilterVariant::krgmee;
  if (name == "QKRMEE") return FilterVariant::qkrmee;
  if (name == "QKRGMEE") return FilterVariant::qkrgmee;
  throw std::invalid_argument("unknown filter variant: " + name);
}

double FilterConfig::ridge_scale() const {
  switch (variant) {
    case FilterVariant::krls:
      return 1.0;
    case FilterVariant::krmee:
    case FilterVariant::qkrmee:
      return 2.0 * criterion.mee_sigma * criterion.mee_sigma;
    default:
      return std::pow(criterion.ggd.beta, criterion.ggd.alpha);
  }
}

ErrorWindow::ErrorWindow(double gamma, int window_len, CodebookMode mode)
    : gamma_(gamma), window_len_(static_cast<std::size_t>(window_len)),
      mode_(mode), cb_(gamma) {}

void ErrorWindow::push(double e) {
  if (mode_ == CodebookMode::incremental) {
    const std::size_t idx = cb_.insert(e);
    entries_.push_back({e, idx});
    if (entries_.size() > window_len_) {
      const std::size_t old = entries_.front().cw_index;
      entries_.erase(entries_.begin());
      if (cb_.remove(old)) {
        for (Entry& en : entries_)
          if (en.cw_index > old) --en.cw_index;
      }
    }
  } else {
    entries_.push_back({e, 0});
    if (entries_.size() > window_len_) entries_.erase(entries_.begin());
    Codebook fresh(gamma_);
    for (Entry& en : entries_) en.cw_index = fresh.insert(en.error);
    cb_ = std::move(fresh);
  }
}

std::vector<double> ErrorWindow::errors() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const Entry& en : entries_) out.push_back(en.error);
  return out;
}

KernelFilter::KernelFilter(std::span<const double> u1, double d1,
                           const FilterConfig& cfg)
    : cfg_(cfg), dim_(u1.size()), ridge_(cfg.ridge_scale() * cfg.reg),
      kappa_self_(kInvSqrt2Pi / cfg.kernel.sigma),
      neg_inv_2s2_(-0.5 / (cfg.kernel.sigma * cfg.kernel.sigma)),
      window_(cfg.gamma, cfg.criterion.window_len, cfg.codebook_mode) {
  if (dim_ == 0) throw std::invalid_argument("KernelFilter: empty input");
  grow_dictionary(u1);
  qcap_ = 64;
  qlo_.assign(qcap_ * qcap_, 0.0);
  const double q1 = 1.0 / (ridge_ + kappa_self_);
  qlo_[0] = q1;
  a_.push_back(q1 * d1);
  theta_trace_.push_back(1.0);
  dtilde_trace_.push_back(d1);
  error_trace_.push_back(0.0);
}

void KernelFilter::grow_dictionary(std::span<const double> u) {
  const std::size_t n = a_.size();
  if (n + 1 > dcap_) {
    const std::size_t ncap = dcap_ == 0 ? 64 : dcap_ * 2;
    std::vector<double> nd(dim_ * ncap, 0.0);
    for (std::size_t k = 0; k < dim_; ++k)
      std::memcpy(nd.data() + k * ncap, dict_.data() + k * dcap_,
                  n * sizeof(double));
    dict_ = std::move(nd);
    dcap_ = ncap;
  }
  for (std::size_t k = 0; k < dim_; ++k) dict_[k * dcap_ + n] = u[k];
}

void KernelFilter::kernel_row(std::span<const double> u, double* out) const {
  if (u.size() != dim_)
    throw std::invalid_argument("KernelFilter: input dimension mismatch");
  const std::size_t n = a_.size();
  scratch_dist_.resize(n);
  simd::sqdist_cols(dict_.data(), dcap_, dim_, n, u.data(),
                    scratch_dist_.data());
  simd::exp_scale(scratch_dist_.data(), out, n, neg_inv_2s2_, kappa_self_);
}

double KernelFilter::predict(std::span<const double> u) const {
  const std::size_t n = a_.size();
  scratch_h_.resize(n);
  kernel_row(u, scratch_h_.data());
  return simd::dot(scratch_h_.data(), a_.data(), n);
}

void KernelFilter::update(std::span<const double> u, double d) {
  const std::size_t n = a_.size();
  scratch_h_.resize(n);
  kernel_row(u, scratch_h_.data());
  const double* h = scratch_h_.data();
  const double y = simd::dot(h, a_.data(), n);
  const double e = d - y;

  double theta = 1.0, dtilde = d;
  if (cfg_.uses_criterion()) {
    const auto t0 = std::chrono::steady_clock::now();
    window_.push(e);
    const ThetaDesired td =
        theta_and_desired(d, e, window_.codebook(), cfg_.criterion,
                          window_.size(), cfg_.criterion_variant());
    criterion_ns_ += std::chrono::duration_cast<std::chrono::nanoseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    theta = td.theta;
    dtilde = td.dtilde;
    if (td.singular) ++singular_events_;

    const auto l = static_cast<std::int64_t>(window_.size());
    const auto hh = static_cast<std::int64_t>(window_.codebook().size());
    switch (cfg_.variant) {
      case FilterVariant::krmee:
        counters_.mults += 8 * l - 8;
        counters_.adds += 3 * l - 3;
        counters_.exps += 4 * l - 4;
        break;
      case FilterVariant::qkrmee:
        counters_.mults += 9 * hh;
        counters_.adds += 3 * hh - 1;
        counters_.exps += 4 * hh;
        break;
      case FilterVariant::krgmee:
        counters_.mults += 9 * l - 9;
        counters_.adds += 4 * l - 4;
        counters_.exps += 6 * l - 6;
        break;
      case FilterVariant::qkrgmee:
        counters_.mults += 10 * hh;
        counters_.adds += 4 * l - 1;
        counters_.exps += 6 * hh;
        break;
      default:
        break;
    }
    h_sum_ += hh;
    ++h_samples_;
  }

  scratch_z_.resize(n);
  simd::symv_lower(qlo_.data(), qcap_, n, h, scratch_z_.data());
  const double* z = scratch_z_.data();
  const double zh = simd::dot(z, h, n);

  double r = kappa_self_ + ridge_ / theta - zh;
  if (r < 1e-12) {
    r += 1e-10;
    if (r < 1e-12) {
      std::ostringstream msg;
      msg << "KernelFilter: r_L breakdown at step " << n + 1 << " (r = " << r
          << ", theta = " << theta << ")";
      throw std::runtime_error(msg.str());
    }
  }
  const double inv_r = 1.0 / r;
  const double gain = (dtilde - y) * inv_r;

  if (n + 1 > qcap_) {
    const std::size_t ncap = qcap_ * 2;
    std::vector<double> nq(ncap * ncap, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      std::memcpy(nq.data() + i * ncap, qlo_.data() + i * qcap_,
                  (i + 1) * sizeof(double));
    qlo_ = std::move(nq);
    qcap_ = ncap;
  }
  simd::syr_lower(qlo_.data(), qcap_, n, z, inv_r);
  double* last = qlo_.data() + n * qcap_;
  for (std::size_t j = 0; j < n; ++j) last[j] = -z[j] * inv_r;
  last[n] = inv_r;

  grow_dictionary(u);  // writes slot n; must precede the coefficient push
  simd::axpy(-gain, z, a_.data(), n);
  a_.push_back(gain);

  theta_trace_.push_back(theta);
  dtilde_trace_.push_back(dtilde);
  error_trace_.push_back(e);
}

std::vector<double> KernelFilter::dictionary_point(std::size_t j) const {
  std::vector<double> p(dim_);
  for (std::size_t k = 0; k < dim_; ++k) p[k] = dict_[k * dcap_ + j];
  return p;
}

std::vector<double> KernelFilter::q_full() const {
  const std::size_t n = a_.size();
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      q[i * n + j] = q[j * n + i] = qlo_[i * qcap_ + j];
  return q;
}

double KernelFilter::h_mean() const {
  return h_samples_ ? static_cast<double>(h_sum_) /
                          static_cast<double>(h_samples_)
                    : 0.0;
}

void KernelFilter::write_snapshot(std::ostream& os) const {
  const std::size_t n = a_.size();
  os.precision(17);
  os << "kaf filter snapshot v1\n";
  os << "variant " << variant_name(cfg_.variant) << "\n";
  os << "dim " << dim_ << "\n";
  os << "n " << n << "\n";
  os << "sigma " << cfg_.kernel.sigma << "\n";
  os << "gamma " << cfg_.gamma << "\n";
  os << "dictionary\n";
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < dim_; ++k)
      os << dict_[k * dcap_ + j] << (k + 1 == dim_ ? '\n' : ' ');
  }
  os << "A\n";
  for (std::size_t j = 0; j < n; ++j) os << a_[j] << "\n";
  os << "Q\n";
  const std::vector<double> q = q_full();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      os << q[i * n + j] << (j + 1 == n ? '\n' : ' ');
  const Codebook& cb = window_.codebook();
  os << "codebook " << cb.size() << "\n";
  for (std::size_t h = 0; h < cb.size(); ++h)
    os << cb.codeword(h) << " " << cb.count(h) << "\n";
  os << "end\n";
}

FilterSnapshot read_snapshot(std::istream& is) {
  FilterSnapshot s;
  std::string line;
  if (!std::getline(is, line) || line != "kaf filter snapshot v1")
    throw std::runtime_error("read_snapshot: bad header");
  std::string key;
  is >> key >> s.variant;
  is >> key >> s.dim;
  is >> key >> s.n;
  is >> key >> s.sigma;
  is >> key >> s.gamma;
  is >> key;  // "dictionary"
  s.dictionary.resize(s.n * s.dim);
  for (double& v : s.dictionary) is >> v;
  is >> key;  // "A"
  s.a.resize(s.n);
  for (double& v : s.a) is >> v;
  is >> key;  // "Q"
  s.q.resize(s.n * s.n);
  for (double& v : s.q) is >> v;
  std::size_t hsz = 0;
  is >> key >> hsz;  // "codebook H"
  s.codewords.resize(hsz);
  s.counts.resize(hsz);
  for (std::size_t h = 0; h < hsz; ++h) is >> s.codewords[h] >> s.counts[h];
  is >> key;
  if (!is || key != "end") throw std::runtime_error("read_snapshot: truncated");
  return s;
}

std::vector<double> batch_solve_frozen(
    const std::vector<std::vector<double>>& inputs,
    std::span<const double> dtilde, std::span<const double> theta,
    const FilterConfig& cfg) {
  const std::size_t n = inputs.size();
  if (dtilde.size() != n || theta.size() != n)
    throw std::invalid_argument("batch_solve_frozen: size mismatch");
  const double ridge = cfg.ridge_scale() * cfg.reg;
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = gaussian_kernel(inputs[i], inputs[j], cfg.kernel);
    m(i, i) += ridge / theta[i];
  }
  return lu_solve(std::move(m), std::vector<double>(dtilde.begin(), dtilde.end()));
}

std::vector<double> batch_solve(const std::vector<std::vector<double>>& inputs,
                                std::span<const double> desired,
                                std::span<const double> errors_for_weights,
                                const FilterConfig& cfg) {
  const std::size_t n = inputs.size();
  if (desired.size() != n || errors_for_weights.size() + 1 != n)
    throw std::invalid_argument("batch_solve: size mismatch");
  std::vector<double> theta(n, 1.0), dtilde(desired.begin(), desired.end());
  if (cfg.uses_criterion()) {
    ErrorWindow win(cfg.gamma, cfg.criterion.window_len, cfg.codebook_mode);
    for (std::size_t i = 1; i < n; ++i) {
      win.push(errors_for_weights[i - 1]);
      const ThetaDesired td = theta_and_desired(
          desired[i], errors_for_weights[i - 1], win.codebook(), cfg.criterion,
          win.size(), cfg.criterion_variant());
      theta[i] = td.theta;
      dtilde[i] = td.dtilde;
    }
  }
  return batch_solve_frozen(inputs, dtilde, theta, cfg);
}

} // namespace kaf

#include "kaf/analysis.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kaf/signals.hpp"
#include "kaf/simd.hpp"

namespace kaf {

double spectral_radius(const Mat& r) {
  const std::size_t m = r.rows();
  if (m != r.cols()) throw std::invalid_argument("spectral_radius: not square");
  if (m == 0) return 0.0;
  if (m == 1) return std::abs(r(0, 0));

  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i)
    v[i] = 1.0 + static_cast<double>(i) / static_cast<double>(m);
  double nrm = 0.0;
  for (double x : v) nrm += x * x;
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;

  double lambda = 0.0, residual = 0.0;
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> w = r * v;
    double ray = 0.0, wn = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      ray += v[i] * w[i];
      wn += w[i] * w[i];
    }
    wn = std::sqrt(wn);
    if (wn == 0.0) return 0.0;
    residual = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = w[i] - ray * v[i];
      residual += d * d;
    }
    residual = std::sqrt(residual);
    if (it > 0 && std::abs(ray - lambda) <= 1e-10 * std::max(1.0, std::abs(ray)) &&
        residual <= 1e-10 * std::max(1.0, std::abs(ray)))
      return std::abs(ray);
    lambda = ray;
    for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / wn;
  }

  if (m <= 64) {
    double rad = 0.0;
    for (const auto& ev : eigenvalues(r)) rad = std::max(rad, std::abs(ev));
    return rad;
  }
  std::ostringstream msg;
  msg << "spectral_radius: power iteration did not converge (residual "
      << residual << ")";
  throw std::runtime_error(msg.str());
}

LyapunovSystem::LyapunovSystem(Mat r_, Mat xi_) : r(std::move(r_)), xi(std::move(xi_)) {
  if (r.rows() != r.cols() || xi.rows() != xi.cols() || r.rows() != xi.rows())
    throw std::invalid_argument("LyapunovSystem: shape mismatch");
  const double scale = std::max(1.0, xi.max_abs());
  for (std::size_t i = 0; i < xi.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(xi(i, j) - xi(j, i)) > 1e-12 * scale)
        throw std::invalid_argument("LyapunovSystem: Xi not symmetric");
}

Mat lyapunov_steady_state(const LyapunovSystem& sys) {
  const std::size_t m = sys.r.rows();
  if (m > 30)
    throw std::invalid_argument("lyapunov_steady_state: m capped at 30");
  if (spectral_radius(sys.r) >= 1.0)
    throw std::runtime_error("lyapunov_steady_state: spectral radius >= 1, no steady state");

  const Mat kr = kronecker(sys.r, sys.r);
  Mat a = Mat::identity(m * m) - kr;
  std::vector<double> vec_xi(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) vec_xi[j * m + i] = sys.xi(i, j);
  const std::vector<double> vec_t = lu_solve(std::move(a), std::move(vec_xi));

  Mat t(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) t(i, j) = vec_t[j * m + i];
  // symmetrize roundoff
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double s = 0.5 * (t(i, j) + t(j, i));
      t(i, j) = t(j, i) = s;
    }
  return t;
}

OpCounters theta_cost(int l, int h, FilterVariant variant) {
  if (l < 1 || h < 1)
    throw std::invalid_argument("theta_cost: L and H must be >= 1");
  OpCounters c;
  switch (variant) {
    case FilterVariant::krmee:
      c = {8 * static_cast<std::int64_t>(l) - 8, 3 * static_cast<std::int64_t>(l) - 3,
           4 * static_cast<std::int64_t>(l) - 4};
      break;
    case FilterVariant::qkrmee:
      c = {9 * static_cast<std::int64_t>(h), 3 * static_cast<std::int64_t>(h) - 1,
           4 * static_cast<std::int64_t>(h)};
      break;
    case FilterVariant::krgmee:
      c = {9 * static_cast<std::int64_t>(l) - 9, 4 * static_cast<std::int64_t>(l) - 4,
           6 * static_cast<std::int64_t>(l) - 6};
      break;
    case FilterVariant::qkrgmee:
      c = {10 * static_cast<std::int64_t>(h), 4 * static_cast<std::int64_t>(l) - 1,
           6 * static_cast<std::int64_t>(h)};
      break;
    case FilterVariant::krls:
      throw std::invalid_argument("theta_cost: KRLS has no criterion row");
  }
  return c;
}

std::int64_t complexity_delta(int l, int h, CriterionFamily family) {
  if (l < 1 || h < 1)
    throw std::invalid_argument("complexity_delta: L and H must be >= 1");
  const auto ll = static_cast<std::int64_t>(l);
  const auto hh = static_cast<std::int64_t>(h);
  return family == CriterionFamily::mee ? 15 * ll - 14 - 16 * hh
                                        : 19 * ll - 18 - 20 * hh;
}

namespace {

// Explicit-feature RLS-type recursion (linear kernel) for the mean-error
// check; mirrors the kernel filter's growing-inverse update.
class LinearToy {
 public:
  LinearToy(std::span<const double> u1, double d1, double reg,
            const MeanErrorConfig& cfg)
      : dim_(u1.size()), reg_(reg), cfg_(cfg),
        window_(cfg.gamma, cfg.criterion ? cfg.criterion->window_len : 1,
                CodebookMode::incremental) {
    dict_.emplace_back(u1.begin(), u1.end());
    const double q1 = 1.0 / (reg_ + dot_self(u1));
    q_.assign(1, q1);
    qcap_ = 1;
    a_.push_back(q1 * d1);
  }

  // returns alpha_n (length m) for the E[alpha phi^T] estimate
  std::vector<double> update(std::span<const double> u, double d) {
    const std::size_t n = a_.size();
    std::vector<double> h(n);
    for (std::size_t j = 0; j < n; ++j)
      h[j] = simd::dot(dict_[j].data(), u.data(), dim_);
    const double y = simd::dot(h.data(), a_.data(), n);
    const double e = d - y;

    // The mean-error theory models w_n = w_{n-1} + (phi - Phi z) r^-1 e_n,
    // with the criterion weight theta entering through r only.
    double theta = 1.0;
    if (cfg_.criterion) {
      window_.push(e);
      theta = theta_weight(e, window_.codebook(), *cfg_.criterion,
                           window_.size(), CriterionVariant::gmee)
                  .theta;
    }

    std::vector<double> z(n, 0.0);
    simd::symv_lower(q_.data(), qcap_, n, h.data(), z.data());
    const double r = dot_self(u) + reg_ / theta - simd::dot(z.data(), h.data(), n);
    const double inv_r = 1.0 / r;
    const double gain = e * inv_r;

    // alpha_n = (u - Phi z) / r
    std::vector<double> alpha(u.begin(), u.end());
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < dim_; ++k) alpha[k] -= dict_[j][k] * z[j];
    for (double& x : alpha) x *= inv_r;

    grow_q();
    simd::syr_lower(q_.data(), qcap_, n, z.data(), inv_r);
    double* last = q_.data() + n * qcap_;
    for (std::size_t j = 0; j < n; ++j) last[j] = -z[j] * inv_r;
    last[n] = inv_r;

    simd::axpy(-gain, z.data(), a_.data(), n);
    a_.push_back(gain);
    dict_.emplace_back(u.begin(), u.end());
    return alpha;
  }

  std::vector<double> weights() const {
    std::vector<double> w(dim_, 0.0);
    for (std::size_t j = 0; j < a_.size(); ++j)
      simd::axpy(a_[j], dict_[j].data(), w.data(), dim_);
    return w;
  }

 private:
  double dot_self(std::span<const double> u) const {
    return simd::dot(u.data(), u.data(), dim_);
  }
  void grow_q() {
    const std::size_t n = a_.size();
    if (n + 1 > qcap_) {
      const std::size_t ncap = qcap_ * 2 < 64 ? 64 : qcap_ * 2;
      std::vector<double> nq(ncap * ncap, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) nq[i * ncap + j] = q_[i * qcap_ + j];
      q_ = std::move(nq);
      qcap_ = ncap;
    }
  }

  std::size_t dim_;
  double reg_;
  const MeanErrorConfig& cfg_;
  ErrorWindow window_;
  std::vector<std::vector<double>> dict_;
  std::vector<double> a_;
  std::vector<double> q_;
  std::size_t qcap_ = 1;
};

} // namespace

MeanErrorReport empirical_mean_error_check(const MeanErrorConfig& cfg) {
  if (cfg.feature_dim < 1 || cfg.feature_dim > 20)
    throw std::invalid_argument("empirical_mean_error_check: feature_dim must be in 1..20");
  if (cfg.mc_runs < 1 || cfg.steps < 2)
    throw std::invalid_argument("empirical_mean_error_check: bad run config");

  const std::size_t m = static_cast<std::size_t>(cfg.feature_dim);
  const std::size_t steps = static_cast<std::size_t>(cfg.steps);

  // ground-truth weights, fixed across runs
  Rng wrng = Rng::stream(cfg.seed, 0);
  std::vector<double> wstar(m);
  for (double& w : wstar) w = wrng.normal();

  std::vector<std::vector<double>> eps_mean(steps, std::vector<double>(m, 0.0));
  Mat alpha_phi(m, m);
  Mat alpha_outer(m, m);
  std::int64_t alpha_samples = 0;

  for (int run = 0; run < cfg.mc_runs; ++run) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(run) + 1);
    const auto draw_u = [&] {
      std::vector<double> u(m);
      for (double& x : u) x = rng.normal();
      return u;
    };
    const auto draw_d = [&](const std::vector<double>& u) {
      double d = 0.0;
      for (std::size_t k = 0; k < m; ++k) d += wstar[k] * u[k];
      if (cfg.noise_std > 0.0) d += rng.normal(0.0, cfg.noise_std);
      return d;
    };

    std::vector<double> u0 = draw_u();
    LinearToy toy(u0, draw_d(u0), cfg.reg, cfg);
    for (std::size_t n = 0; n < steps; ++n) {
      const std::vector<double> u = draw_u();
      const std::vector<double> alpha = toy.update(u, draw_d(u));
      const std::vector<double> w = toy.weights();
      for (std::size_t k = 0; k < m; ++k) eps_mean[n][k] += wstar[k] - w[k];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          alpha_phi(i, j) += alpha[i] * u[j];
          alpha_outer(i, j) += alpha[i] * alpha[j];
        }
      ++alpha_samples;
    }
  }

  for (auto& row : eps_mean)
    for (double& x : row) x /= static_cast<double>(cfg.mc_runs);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      alpha_phi(i, j) /= static_cast<double>(alpha_samples);
      alpha_outer(i, j) /= static_cast<double>(alpha_samples);
    }

  MeanErrorReport rep;
  const Mat r = Mat::identity(m) - alpha_phi;
  rep.spectral_radius = spectral_radius(r);
  rep.r_estimate = r;
  rep.alpha_outer = alpha_outer;

  const std::size_t block = static_cast<std::size_t>(std::max(1, cfg.smooth_block));
  for (std::size_t b = 0; b + block <= steps; b += block) {
    double s = 0.0;
    for (std::size_t n = b; n < b + block; ++n) {
      double nn = 0.0;
      for (double x : eps_mean[n]) nn += x * x;
      s += std::sqrt(nn);
    }
    rep.block_norms.push_back(s / static_cast<double>(block));
  }
  rep.initial_norm = rep.block_norms.front();
  rep.final_norm = rep.block_norms.back();

  // Decreasing means every smoothed block shrinks by at least 2 percent
  // until the trajectory reaches the Monte Carlo floor (2 percent of the
  // initial norm); the flat degenerate case fails this.
  const double floor = 0.02 * rep.initial_norm;
  bool decreasing = true;
  for (std::size_t b = 1; b < rep.block_norms.size(); ++b) {
    if (rep.block_norms[b] <= floor) continue;
    if (rep.block_norms[b] > rep.block_norms[b - 1] * 0.98) decreasing = false;
  }
  rep.pass = decreasing && rep.spectral_radius < 1.0;
  rep.verdict = rep.pass ? "converges" : "no convergence evidence";
  return rep;
}

void MeanErrorReport::write_kv(std::ostream& os) const {
  os << "spectral_radius=" << spectral_radius << "\n";
  os << "initial_norm=" << initial_norm << "\n";
  os << "final_norm=" << final_norm << "\n";
  os << "blocks=" << block_norms.size() << "\n";
  for (std::size_t i = 0; i < block_norms.size(); ++i)
    os << "block_norm_" << i << "=" << block_norms[i] << "\n";
  os << "pass=" << (pass ? 1 : 0) << "\n";
  os << "verdict=" << verdict << "\n";
}

} // namespace kaf

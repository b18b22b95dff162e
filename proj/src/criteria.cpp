#include "kaf/criteria.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "kaf/linalg.hpp"

namespace kaf {

namespace {

void check_counts(std::span<const double> errors, const Codebook& cb,
                  const char* who) {
  if (cb.total_count() != errors.size())
    throw std::invalid_argument(std::string(who) +
                                ": codebook counts do not cover the error set");
}

// |e - c|^(alpha-2) with the alpha < 2 singularity clamped at kSingularEps.
double weight_exponent(double dist, double alpha, bool* singular) {
  if (alpha == 2.0) return 1.0;
  if (alpha < 2.0 && dist < kSingularEps) {
    if (singular) *singular = true;
    dist = kSingularEps;
  }
  return std::pow(dist, alpha - 2.0);
}

} // namespace

double empirical_ip(std::span<const double> errors, const GGDParams& p) {
  if (errors.empty()) throw std::invalid_argument("empirical_ip: empty errors");
  const GGDEvaluator g(p);
  const std::size_t n = errors.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += g(errors[i] - errors[j]);
  return s / (static_cast<double>(n) * static_cast<double>(n));
}

double quantized_ip(std::span<const double> errors, const Codebook& cb,
                    const GGDParams& p) {
  check_counts(errors, cb, "quantized_ip");
  const GGDEvaluator g(p);
  const std::size_t n = errors.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 0; h < cb.size(); ++h)
      s += static_cast<double>(cb.count(h)) * g(errors[i] - cb.codeword(h));
  return s / (static_cast<double>(n) * static_cast<double>(n));
}

double qmee_ip(std::span<const double> errors, const Codebook& cb,
               double sigma) {
  check_counts(errors, cb, "qmee_ip");
  const std::size_t n = errors.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 0; h < cb.size(); ++h)
      s += static_cast<double>(cb.count(h)) *
           gauss_fn(errors[i] - cb.codeword(h), sigma);
  return s / (static_cast<double>(n) * static_cast<double>(n));
}

double large_beta_ip_approx(std::span<const double> errors, const Codebook& cb,
                            const GGDParams& p) {
  const GGDEvaluator g(p);
  const std::size_t n = errors.size();
  double moment = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 0; h < cb.size(); ++h)
      moment += static_cast<double>(cb.count(h)) *
                std::pow(std::abs(errors[i] - cb.codeword(h)), p.alpha);
  moment /= static_cast<double>(n) * static_cast<double>(n);
  return g.peak() - g.peak() * g.inv_beta_alpha() * moment;
}

ThetaDesired theta_and_desired(double d, double e, const Codebook& cb,
                               const CriterionParams& cp, int time_index,
                               CriterionVariant variant) {
  if (cb.empty())
    throw std::invalid_argument("theta_weight: empty codebook");
  const bool gmee = variant == CriterionVariant::gmee;
  std::optional<GGDEvaluator> gg;
  if (gmee) gg.emplace(cp.ggd);
  const double alpha = cp.ggd.alpha;
  const bool unit_lambda = cp.lambda == 1.0;

  bool singular = false;
  double theta = 0.0, csum = 0.0;
  for (std::size_t h = 0; h < cb.size(); ++h) {
    const double c = cb.codeword(h);
    const double dist = std::abs(e - c);
    double k = static_cast<double>(cb.count(h));
    if (!unit_lambda) {
      const double expo =
          cp.lambda_index_mode == LambdaIndexMode::literal
              ? static_cast<double>(time_index) + static_cast<double>(h + 1)
              : static_cast<double>(time_index);
      k *= std::pow(cp.lambda, expo);
    }
    if (gmee) {
      k *= (*gg)(e - c) * weight_exponent(dist, alpha, &singular);
    } else {
      k *= gauss_fn(e - c, cp.mee_sigma);
    }
    theta += k;
    csum += k * c;
  }
  if (theta < 1e-300) {
    // fully underflowed window; treat the sample as unsupported
    theta = 1e-300;
    csum = 0.0;
    singular = true;
  }
  return {theta, d - csum / theta, singular};
}

ThetaResult theta_weight(double e, const Codebook& cb,
                         const CriterionParams& cp, int time_index,
                         CriterionVariant variant) {
  const ThetaDesired td = theta_and_desired(0.0, e, cb, cp, time_index, variant);
  return {td.theta, td.singular};
}

double effective_desired(double d, double e, const Codebook& cb,
                         const CriterionParams& cp, int time_index,
                         CriterionVariant variant) {
  return theta_and_desired(d, e, cb, cp, time_index, variant).dtilde;
}

QgmeeSystem qgmee_system(std::span<const double> w,
                         const std::vector<std::vector<double>>& inputs,
                         std::span<const double> desired, const Codebook& cb,
                         const GGDParams& p) {
  const std::size_t n = inputs.size();
  const std::size_t dim = n ? inputs[0].size() : 0;
  if (desired.size() != n || w.size() != dim)
    throw std::invalid_argument("qgmee_system: size mismatch");
  const GGDEvaluator g(p);
  QgmeeSystem sys;
  sys.m.assign(dim, 0.0);
  sys.n.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& u = inputs[i];
    double pred = 0.0;
    for (std::size_t k = 0; k < dim; ++k) pred += w[k] * u[k];
    const double e = desired[i] - pred;
    double omega = 0.0, mscale = 0.0;
    for (std::size_t h = 0; h < cb.size(); ++h) {
      const double c = cb.codeword(h);
      const double dist = std::abs(e - c);
      const double k = static_cast<double>(cb.count(h)) * g(e - c) *
                       weight_exponent(dist, p.alpha, nullptr);
      omega += k;
      mscale += k * (desired[i] - c);
    }
    for (std::size_t r = 0; r < dim; ++r) {
      sys.m[r] += mscale * u[r];
      for (std::size_t c2 = 0; c2 < dim; ++c2)
        sys.n[r * dim + c2] += omega * u[r] * u[c2];
    }
  }
  return sys;
}

namespace {

double vec_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// residual M - N w
std::vector<double> system_residual(const QgmeeSystem& sys,
                                    std::span<const double> w) {
  const std::size_t dim = sys.m.size();
  std::vector<double> r = sys.m;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) r[i] -= sys.n[i * dim + j] * w[j];
  return r;
}

} // namespace

std::vector<double> qgmee_gradient(std::span<const double> w,
                                   const std::vector<std::vector<double>>& inputs,
                                   std::span<const double> desired,
                                   const Codebook& cb, const GGDParams& p) {
  const QgmeeSystem sys = qgmee_system(w, inputs, desired, cb, p);
  std::vector<double> grad = system_residual(sys, w);
  const double l = static_cast<double>(inputs.size());
  const double scale = p.alpha / (l * l * std::pow(p.beta, p.alpha));
  for (double& x : grad) x *= scale;
  return grad;
}

namespace {

// IP objective (up to positive constants) whose gradient is M - N w.
double ip_objective(std::span<const double> w,
                    const std::vector<std::vector<double>>& inputs,
                    std::span<const double> desired, const Codebook& cb,
                    const GGDEvaluator& g) {
  double v = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    double pred = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) pred += w[k] * inputs[i][k];
    const double e = desired[i] - pred;
    for (std::size_t h = 0; h < cb.size(); ++h)
      v += static_cast<double>(cb.count(h)) * g(e - cb.codeword(h));
  }
  return v;
}

} // namespace

std::vector<double> batch_qgmee_fixed_point(
    const std::vector<std::vector<double>>& inputs,
    std::span<const double> desired, const Codebook& cb, const GGDParams& p) {
  const std::size_t n = inputs.size();
  if (n == 0) throw std::invalid_argument("batch_qgmee_fixed_point: no data");
  const std::size_t dim = inputs[0].size();
  const GGDEvaluator g(p);

  // start from the plain least-squares solution
  Mat gram(dim, dim);
  std::vector<double> rhs(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < dim; ++r) {
      rhs[r] += desired[i] * inputs[i][r];
      for (std::size_t c = 0; c < dim; ++c)
        gram(r, c) += inputs[i][r] * inputs[i][c];
    }
  }
  const double ls_ridge = 1e-12 * (gram.max_abs() + 1.0);
  for (std::size_t r = 0; r < dim; ++r) gram(r, r) += ls_ridge;
  std::vector<double> w = lu_solve(gram, rhs);

  const auto objective = [&](std::span<const double> ww) {
    return ip_objective(ww, inputs, desired, cb, g);
  };

  // The plain half-quadratic iteration w <- N^-1 M is not a contraction for
  // every shape parameter (the local iteration eigenvalues are real but can
  // drop below -1), so steps are damped until the residual M - N w shrinks;
  // a gradient line search on the IP objective covers the far field.
  const auto resid_norm = [&](std::span<const double> ww) {
    const QgmeeSystem s = qgmee_system(ww, inputs, desired, cb, p);
    return vec_norm(system_residual(s, ww));
  };
  for (int it = 0; it < 2000; ++it) {
    QgmeeSystem sys = qgmee_system(w, inputs, desired, cb, p);
    const double mnorm = vec_norm(sys.m);
    const std::vector<double> grad = system_residual(sys, w);
    const double gn = vec_norm(grad);
    if (gn <= 1e-10 * mnorm) return w;

    Mat nm(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) nm(r, c) = sys.n[r * dim + c];
    if (lu_condition_estimate(nm) > 1e12) {
      const double ridge = 1e-12 * (nm.max_abs() + 1.0);
      for (std::size_t r = 0; r < dim; ++r) nm(r, r) += ridge;
    }
    const std::vector<double> wp = lu_solve(std::move(nm), sys.m);

    bool accepted = false;
    std::vector<double> cand(dim);
    for (double eta = 1.0; eta >= 1.0 / 65536.0; eta *= 0.5) {
      for (std::size_t k = 0; k < dim; ++k)
        cand[k] = w[k] + eta * (wp[k] - w[k]);
      if (resid_norm(cand) < gn * (1.0 - 0.05 * eta)) {
        w = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // far-field rescue: ascend the objective along the gradient
      const double v0 = objective(w);
      double step = (vec_norm(w) + 1.0) / (gn + 1e-300);
      for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
        for (std::size_t k = 0; k < dim; ++k) cand[k] = w[k] + step * grad[k];
        if (objective(cand) > v0) {
          w = cand;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;  // stationary to machine precision
  }

  const QgmeeSystem sys = qgmee_system(w, inputs, desired, cb, p);
  if (vec_norm(system_residual(sys, w)) <= 1e-8 * vec_norm(sys.m)) return w;
  throw std::runtime_error("batch_qgmee_fixed_point: no self-consistent solution");
}

} // namespace kaf

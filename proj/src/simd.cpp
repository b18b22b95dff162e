#include "kaf/simd.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace kaf::simd {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_axpy_scalar(const double* row, double xi, const double* x,
                       double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += row[i] * x[i];
    y[i] += xi * row[i];
  }
  return s;
}

void sqdist_cols_scalar(const double* cols, std::size_t stride,
                        std::size_t dim, std::size_t count, const double* q,
                        double* out) {
  for (std::size_t j = 0; j < count; ++j) out[j] = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double* col = cols + k * stride;
    const double qk = q[k];
    for (std::size_t j = 0; j < count; ++j) {
      const double d = col[j] - qk;
      out[j] += d * d;
    }
  }
}

void exp_scale_scalar(const double* src, double* dst, std::size_t n,
                      double scale, double coef) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = coef * std::exp(scale * src[i]);
}

#if !defined(__x86_64__) && !defined(_M_X64)
bool cpu_has_avx2() { return false; }
double dot_avx2(const double* a, const double* b, std::size_t n) {
  return dot_scalar(a, b, n);
}
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  axpy_scalar(alpha, x, y, n);
}
double dot_axpy_avx2(const double* row, double xi, const double* x, double* y,
                     std::size_t n) {
  return dot_axpy_scalar(row, xi, x, y, n);
}
void sqdist_cols_avx2(const double* cols, std::size_t stride, std::size_t dim,
                      std::size_t count, const double* q, double* out) {
  sqdist_cols_scalar(cols, stride, dim, count, q, out);
}
void exp_scale_avx2(const double* src, double* dst, std::size_t n,
                    double scale, double coef) {
  exp_scale_scalar(src, dst, n, scale, coef);
}
#endif

} // namespace detail

namespace {

struct Kernels {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*dot_axpy)(const double*, double, const double*, double*, std::size_t);
  void (*sqdist_cols)(const double*, std::size_t, std::size_t, std::size_t,
                      const double*, double*);
  void (*exp_scale)(const double*, double*, std::size_t, double, double);
};

constexpr Kernels kScalar = {
    detail::dot_scalar, detail::axpy_scalar, detail::dot_axpy_scalar,
    detail::sqdist_cols_scalar, detail::exp_scale_scalar};

constexpr Kernels kAvx2 = {
    detail::dot_avx2, detail::axpy_avx2, detail::dot_axpy_avx2,
    detail::sqdist_cols_avx2, detail::exp_scale_avx2};

struct State {
  Backend backend;
  const Kernels* k;
};

State init_state() {
  Backend b = detail::cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("KAF_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) b = Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && detail::cpu_has_avx2())
      b = Backend::avx2;
  }
  return {b, b == Backend::avx2 ? &kAvx2 : &kScalar};
}

State& state() {
  static State s = init_state();
  return s;
}

} // namespace

Backend active_backend() { return state().backend; }

const char* backend_name() {
  return state().backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
  return b == Backend::scalar || detail::cpu_has_avx2();
}

bool set_backend(Backend b) {
  if (!backend_available(b)) return false;
  state() = {b, b == Backend::avx2 ? &kAvx2 : &kScalar};
  return true;
}

double dot(const double* a, const double* b, std::size_t n) {
  return state().k->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  state().k->axpy(alpha, x, y, n);
}

double dot_axpy(const double* row, double xi, const double* x, double* y,
                std::size_t n) {
  return state().k->dot_axpy(row, xi, x, y, n);
}

void sqdist_cols(const double* cols, std::size_t stride, std::size_t dim,
                 std::size_t count, const double* q, double* out) {
  state().k->sqdist_cols(cols, stride, dim, count, q, out);
}

void exp_scale(const double* src, double* dst, std::size_t n, double scale,
               double coef) {
  state().k->exp_scale(src, dst, n, scale, coef);
}

void symv_lower(const double* m, std::size_t stride, std::size_t n,
                const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = m + i * stride;
    // off-diagonal part of row i feeds both y[i] and y[0..i)
    y[i] += dot_axpy(row, x[i], x, y, i);
    y[i] += row[i] * x[i];
  }
}

void syr_lower(double* m, std::size_t stride, std::size_t n, const double* z,
               double c) {
  for (std::size_t i = 0; i < n; ++i) {
    axpy(c * z[i], z, m + i * stride, i + 1);
  }
}

} // namespace kaf::simd

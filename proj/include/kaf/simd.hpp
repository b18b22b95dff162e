#pragma once
// Runtime-dispatched arithmetic kernels used by the hot loops of the filter
// engines: dot products, axpy, fused dot+axpy (one pass of a symmetric
// matrix-vector product), column-major squared distances, and a vectorized
// coef*exp(scale*x) used for Gaussian kernel rows.
//
// Every kernel has a scalar reference implementation and an AVX2/FMA variant.
// The backend is picked once at startup from cpuid and can be overridden with
// the KAF_SIMD environment variable ("scalar" or "avx2") or set_backend().
// All kernels are pure and safe to call concurrently.

#include <cstddef>

namespace kaf::simd {

enum class Backend { scalar, avx2 };

// Active backend for all dispatched kernels in this process.
Backend active_backend();
const char* backend_name();

// Returns false if the requested backend is not available on this CPU.
bool set_backend(Backend b);
bool backend_available(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha*x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// y[i] += xi*row[i]; returns sum_i row[i]*x[i].  One fused pass over `row`,
// which is what a lower-triangle symmetric mat-vec needs per row.
double dot_axpy(const double* row, double xi, const double* x, double* y,
                std::size_t n);

// out[j] = sum_k (cols[k*stride + j] - q[k])^2  for j in [0, count).
// `cols` is column-major: component k of point j lives at cols[k*stride + j].
void sqdist_cols(const double* cols, std::size_t stride, std::size_t dim,
                 std::size_t count, const double* q, double* out);

// dst[i] = coef * exp(scale * src[i]).  The AVX2 variant uses a polynomial
// exp accurate to a few ulp; equivalence against std::exp is tested.
void exp_scale(const double* src, double* dst, std::size_t n, double scale,
               double coef);

// --- compositions over the dispatched primitives -------------------------

// y = M x for a symmetric matrix stored as its lower triangle in a row-major
// buffer with the given row stride (entries j<=i of row i are valid).
void symv_lower(const double* m, std::size_t stride, std::size_t n,
                const double* x, double* y);

// M += c * z z^T, lower triangle only.
void syr_lower(double* m, std::size_t stride, std::size_t n, const double* z,
               double c);

namespace detail {
// Scalar and AVX2 entry points, exposed so the equivalence tests can call
// both sides directly regardless of the active backend.
double dot_scalar(const double*, const double*, std::size_t);
void axpy_scalar(double, const double*, double*, std::size_t);
double dot_axpy_scalar(const double*, double, const double*, double*, std::size_t);
void sqdist_cols_scalar(const double*, std::size_t, std::size_t, std::size_t,
                        const double*, double*);
void exp_scale_scalar(const double*, double*, std::size_t, double, double);

double dot_avx2(const double*, const double*, std::size_t);
void axpy_avx2(double, const double*, double*, std::size_t);
double dot_axpy_avx2(const double*, double, const double*, double*, std::size_t);
void sqdist_cols_avx2(const double*, std::size_t, std::size_t, std::size_t,
                      const double*, double*);
void exp_scale_avx2(const double*, double*, std::size_t, double, double);

bool cpu_has_avx2();
} // namespace detail

} // namespace kaf::simd

// Scalar reference kernels. Built with -ffp-contract=off so they stay the
// plain multiply-then-add sequence the vector variants are checked against.

#include <algorithm>

#include "layercon/kernels.hpp"

namespace layercon::kernels {
namespace {

void gemv2(const double* A, std::size_t rows, std::size_t cols, const double* x0,
           const double* x1, double* y0, double* y1) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* a = A + r * cols;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      s0 += a[c] * x0[c];
      s1 += a[c] * x1[c];
    }
    y0[r] = s0;
    y1[r] = s1;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_add2(const double* a, const double* b, const double* c, const double* d, double* out,
              std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i] + c[i] * d[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_pow4(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = a[i] * a[i];
    s += q * q;
  }
  return s;
}

void min_max(const double* a, std::size_t n, double* lo, double* hi) {
  double l = a[0], h = a[0];
  for (std::size_t i = 1; i < n; ++i) {
    l = std::min(l, a[i]);
    h = std::max(h, a[i]);
  }
  *lo = l;
  *hi = h;
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar, gemv2, dot, mul, mul_add2, axpy, sum_sq, sum_pow4, min_max};
}  // namespace detail

}  // namespace layercon::kernels

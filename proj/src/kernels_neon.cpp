// AArch64 NEON variants (two doubles per register). Advanced SIMD is part of
// the base AArch64 ISA, so no runtime probe is needed beyond the build check.

#include <arm_neon.h>

#include <algorithm>

#include "layercon/kernels.hpp"

namespace layercon::kernels {
namespace {

void gemv2(const double* A, std::size_t rows, std::size_t cols, const double* x0,
           const double* x1, double* y0, double* y1) {
  const std::size_t vec_end = cols & ~std::size_t{1};
  for (std::size_t r = 0; r < rows; ++r) {
    const double* a = A + r * cols;
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t c = 0;
    for (; c < vec_end; c += 2) {
      const float64x2_t va = vld1q_f64(a + c);
      acc0 = vfmaq_f64(acc0, va, vld1q_f64(x0 + c));
      acc1 = vfmaq_f64(acc1, va, vld1q_f64(x1 + c));
    }
    double s0 = vaddvq_f64(acc0), s1 = vaddvq_f64(acc1);
    for (; c < cols; ++c) {
      s0 += a[c] * x0[c];
      s1 += a[c] * x1[c];
    }
    y0[r] = s0;
    y1[r] = s1;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_add2(const double* a, const double* b, const double* c, const double* d, double* out,
              std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t cd = vmulq_f64(vld1q_f64(c + i), vld1q_f64(d + i));
    vst1q_f64(out + i, vfmaq_f64(cd, vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i] + c[i] * d[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(a + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_pow4(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(a + i);
    const float64x2_t q = vmulq_f64(v, v);
    acc = vfmaq_f64(acc, q, q);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double q = a[i] * a[i];
    s += q * q;
  }
  return s;
}

void min_max(const double* a, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double l = a[0], h = a[0];
  if (n >= 2) {
    float64x2_t vl = vld1q_f64(a);
    float64x2_t vh = vl;
    for (i = 2; i + 2 <= n; i += 2) {
      const float64x2_t v = vld1q_f64(a + i);
      vl = vminq_f64(vl, v);
      vh = vmaxq_f64(vh, v);
    }
    l = vminvq_f64(vl);
    h = vmaxvq_f64(vh);
  }
  for (; i < n; ++i) {
    l = std::min(l, a[i]);
    h = std::max(h, a[i]);
  }
  *lo = l;
  *hi = h;
}

}  // namespace

namespace detail {
const KernelTable neon_table{Isa::neon, gemv2, dot, mul, mul_add2, axpy, sum_sq, sum_pow4, min_max};
}  // namespace detail

}  // namespace layercon::kernels

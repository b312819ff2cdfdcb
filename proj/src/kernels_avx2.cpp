// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and only reached after a runtime cpuid check.

#include <immintrin.h>

#include <algorithm>

#include "layercon/kernels.hpp"

namespace layercon::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gemv2(const double* A, std::size_t rows, std::size_t cols, const double* x0,
           const double* x1, double* y0, double* y1) {
  const std::size_t vec_end = cols & ~std::size_t{3};
  for (std::size_t r = 0; r < rows; ++r) {
    const double* a = A + r * cols;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c < vec_end; c += 4) {
      const __m256d va = _mm256_loadu_pd(a + c);
      acc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x0 + c), acc0);
      acc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x1 + c), acc1);
    }
    double s0 = hsum(acc0), s1 = hsum(acc1);
    for (; c < cols; ++c) {
      s0 += a[c] * x0[c];
      s1 += a[c] * x1[c];
    }
    y0[r] = s0;
    y1[r] = s1;
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_add2(const double* a, const double* b, const double* c, const double* d, double* out,
              std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d cd = _mm256_mul_pd(_mm256_loadu_pd(c + i), _mm256_loadu_pd(d + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), cd));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i] + c[i] * d[i];
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum_pow4(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    const __m256d q = _mm256_mul_pd(v, v);
    acc = _mm256_fmadd_pd(q, q, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double q = a[i] * a[i];
    s += q * q;
  }
  return s;
}

void min_max(const double* a, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double l = a[0], h = a[0];
  if (n >= 4) {
    __m256d vl = _mm256_loadu_pd(a);
    __m256d vh = vl;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(a + i);
      vl = _mm256_min_pd(vl, v);
      vh = _mm256_max_pd(vh, v);
    }
    alignas(32) double bl[4], bh[4];
    _mm256_store_pd(bl, vl);
    _mm256_store_pd(bh, vh);
    l = std::min(std::min(bl[0], bl[1]), std::min(bl[2], bl[3]));
    h = std::max(std::max(bh[0], bh[1]), std::max(bh[2], bh[3]));
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
const KernelTable avx2_table{Isa::avx2, gemv2, dot, mul, mul_add2, axpy, sum_sq, sum_pow4, min_max};
}  // namespace detail

}  // namespace layercon::kernels

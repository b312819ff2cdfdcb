#pragma once

// Data-parallel inner loops used by the spectral transforms and the nodal
// nonlinear term. Every kernel has a scalar reference; vector variants are
// compiled per ISA and picked once at startup from what the CPU reports.
// LAYERCON_SIMD=scalar|avx2|neon overrides the choice (unknown or unsupported
// values fall back to the best available).

#include <cstddef>
#include <string_view>
#include <vector>

namespace layercon::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;

  /// y0 = A x0, y1 = A x1 for row-major A (rows x cols). Used with x0/x1 the
  /// real and imaginary parts of a complex vector.
  void (*gemv2)(const double* A, std::size_t rows, std::size_t cols, const double* x0,
                const double* x1, double* y0, double* y1);
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// out = a * b
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  /// out = a * b + c * d
  void (*mul_add2)(const double* a, const double* b, const double* c, const double* d,
                   double* out, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_sq)(const double* a, std::size_t n);
  double (*sum_pow4)(const double* a, std::size_t n);
  void (*min_max)(const double* a, std::size_t n, double* lo, double* hi);
};

/// Table selected for this process.
const KernelTable& active();

/// Table for a specific ISA, or nullptr when it is not compiled in or the
/// CPU lacks it.
const KernelTable* table_for(Isa isa);

/// All ISAs usable on this machine; scalar is always first.
std::vector<Isa> available();

namespace detail {
extern const KernelTable scalar_table;
#if defined(LAYERCON_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(LAYERCON_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace layercon::kernels

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "layercon/kernels.hpp"

using namespace layercon::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("every available ISA agrees with the scalar reference") {
  const KernelTable& ref = *table_for(Isa::scalar);
  std::mt19937_64 rng(7);
  for (Isa isa : available()) {
    const KernelTable& t = *table_for(isa);
    CAPTURE(isa_name(isa));
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 64u, 257u}) {
      CAPTURE(n);
      const auto a = random_vec(rng, n), b = random_vec(rng, n);
      const auto c = random_vec(rng, n), d = random_vec(rng, n);
      const double tol = 1e-14 * n;

      CHECK(std::abs(t.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol);
      CHECK(std::abs(t.sum_sq(a.data(), n) - ref.sum_sq(a.data(), n)) <= tol);
      CHECK(std::abs(t.sum_pow4(a.data(), n) - ref.sum_pow4(a.data(), n)) <= tol);

      std::vector<double> o1(n), o2(n);
      t.mul(a.data(), b.data(), o1.data(), n);
      ref.mul(a.data(), b.data(), o2.data(), n);
      CHECK(o1 == o2);

      t.mul_add2(a.data(), b.data(), c.data(), d.data(), o1.data(), n);
      ref.mul_add2(a.data(), b.data(), c.data(), d.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(o1[i] - o2[i]) <= 1e-15);

      o1 = c;
      o2 = c;
      t.axpy(0.75, a.data(), o1.data(), n);
      ref.axpy(0.75, a.data(), o2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(o1[i] - o2[i]) <= 1e-15);

      double lo1, hi1, lo2, hi2;
      t.min_max(a.data(), n, &lo1, &hi1);
      ref.min_max(a.data(), n, &lo2, &hi2);
      CHECK(lo1 == lo2);
      CHECK(hi1 == hi2);

      const std::size_t rows = n % 6 + 1;
      const auto A = random_vec(rng, rows * n);
      std::vector<double> y0(rows), y1(rows), r0(rows), r1(rows);
      t.gemv2(A.data(), rows, n, a.data(), b.data(), y0.data(), y1.data());
      ref.gemv2(A.data(), rows, n, a.data(), b.data(), r0.data(), r1.data());
      for (std::size_t i = 0; i < rows; ++i) {
        CHECK(std::abs(y0[i] - r0[i]) <= tol);
        CHECK(std::abs(y1[i] - r1[i]) <= tol);
      }
    }
  }
}

TEST_CASE("scalar reference against direct loops") {
  const KernelTable& ref = *table_for(Isa::scalar);
  const std::vector<double> a{1, -2, 3}, b{4, 5, -6};
  CHECK(ref.dot(a.data(), b.data(), 3) == 4 - 10 - 18);
  CHECK(ref.sum_sq(a.data(), 3) == 14);
  CHECK(ref.sum_pow4(a.data(), 3) == 1 + 16 + 81);
  double lo, hi;
  ref.min_max(a.data(), 3, &lo, &hi);
  CHECK(lo == -2);
  CHECK(hi == 3);
  if (!std::getenv("LAYERCON_SIMD")) CHECK(active().isa == available().back());
}

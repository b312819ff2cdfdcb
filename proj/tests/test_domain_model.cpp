#include "doctest.h"

#include <cmath>
#include <vector>

#include "layercon/layer_stack.hpp"

using namespace layercon;

namespace {

LayerStack two_layer() {
  return LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {1, 1, 2}}, 1.0);
}

// Finite-difference steady conduction: harmonic-mean face coefficients,
// n cells per unit depth, Thomas solve. Returns node values on a uniform grid.
std::vector<double> fd_conduction(const LayerStack& s, double C0, double C1, int n,
                                  std::vector<double>& z) {
  const double H = s.depth();
  const double dz = H / n;
  z.resize(n + 1);
  for (int i = 0; i <= n; ++i) z[i] = -H + i * dz;
  std::vector<double> k(n);  // face coefficient between node i and i+1
  for (int i = 0; i < n; ++i) k[i] = s.material_at(z[i] + 0.5 * dz).bD();
  std::vector<double> a(n + 1), b(n + 1), c(n + 1), d(n + 1);
  b[0] = 1; d[0] = C1;
  b[n] = 1; d[n] = C0;
  for (int i = 1; i < n; ++i) {
    a[i] = -k[i - 1];
    c[i] = -k[i];
    b[i] = k[i - 1] + k[i];
    d[i] = 0;
  }
  for (int i = 1; i <= n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> x(n + 1);
  x[n] = d[n] / b[n];
  for (int i = n - 1; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

}  // namespace

TEST_CASE("build normalizes and validates") {
  const auto s = LayerStack::build({0.0, -1.0}, {{1, 1, 1}}, 1.0);
  CHECK(s.layer_count() == 1);
  CHECK(s.depth() == 1.0);

  const auto p = LayerStack::build({0.0, 0.5, 1.0}, {{1, 1, 1}, {1, 1, 2}}, 2.0);
  CHECK(p.interface(1) == -0.5);
  CHECK(p.interface(2) == -1.0);

  const auto shifted = LayerStack::build({2.0, 1.5, 1.0}, {{1, 1, 1}, {1, 1, 2}}, 1.0);
  CHECK(shifted.interface(0) == 0.0);
  CHECK(shifted.interface(2) == -1.0);

  CHECK_THROWS_AS(LayerStack::build({0.0, -1.0, -0.5}, {{1, 1, 1}, {1, 1, 1}}, 1.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0}, {}, 1.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0, -1.0}, {{0, 1, 1}}, 1.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0, -1.0}, {{1, 1.5, 1}}, 1.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0, -1.0}, {{1, 0, 1}}, 1.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0, -1.0}, {{1, 1, -1}}, 1.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0, -1.0}, {{1, 1, 1}}, 0.0), ConfigError);
  CHECK_THROWS_AS(LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}}, 1.0), ConfigError);
}

TEST_CASE("material_at and the interface tie-break") {
  const auto s = two_layer();
  CHECK(s.material_at(-0.25).D == 1.0);
  CHECK(s.material_at(-0.75).D == 2.0);
  CHECK(s.material_at(-0.5).D == 2.0);
  CHECK(s.material_at(0.0).D == 1.0);
  CHECK(s.material_at(-1.0).D == 2.0);
  CHECK_THROWS_AS(s.material_at(0.1), ConfigError);
  CHECK_THROWS_AS(s.material_at(-1.1), ConfigError);
}

TEST_CASE("hash tracks geometry and material") {
  const auto a = two_layer();
  const auto b = two_layer();
  const auto c = LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {1, 1, 3}}, 1.0);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a == b);
}

TEST_CASE("constants and boundary data validation") {
  PhysicalConstants k;
  CHECK_NOTHROW(k.validate());
  k.alpha = 2.0;
  k.g = 3.0;
  CHECK(k.buoyancy() == 6.0);
  k.alpha = 0.0;
  CHECK_NOTHROW(k.validate());
  k.alpha = -1.0;
  CHECK_THROWS_AS(k.validate(), ConfigError);
  k.alpha = 1.0;
  k.mu = 0.0;
  CHECK_THROWS_AS(k.validate(), ConfigError);
  BoundaryData bd{0.0, std::nan("")};
  CHECK_THROWS_AS(bd.validate(), ConfigError);
  CHECK(BoundaryData{}.homogeneous());
}

TEST_CASE("single-layer conduction is the affine lift") {
  const auto s = LayerStack::build({0.0, -2.0}, {{1, 0.5, 3}}, 1.0);
  const BoundaryData bd{0.3, 1.7};
  const auto lift = conduction_profile(s, bd);
  const double H = 2.0;
  for (int i = 0; i <= 20; ++i) {
    const double z = -H * i / 20.0;
    const double affine = -(1.0 / H) * (bd.C1 * z - bd.C0 * (H + z));
    CHECK(std::abs(lift.value(z) - affine) <= 1e-14);
  }
  const auto unit = conduction_profile(LayerStack::build({0.0, -1.0}, {{1, 1, 1}}, 1.0), {0.0, 1.0});
  CHECK(unit.value(-0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(unit.flux() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-layer conduction matches the hand solution and finite differences") {
  const auto s = two_layer();
  const auto lift = conduction_profile(s, {0.0, 1.0});
  CHECK(std::abs(lift.value(-0.5) - 2.0 / 3.0) <= 1e-14);
  CHECK(std::abs(std::abs(lift.flux()) - 4.0 / 3.0) <= 1e-14);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(-s.layer(j).bD() * lift.slope(j) - lift.flux()) <= 1e-14);
  }

  std::vector<double> z;
  const auto fd = fd_conduction(s, 0.0, 1.0, 64, z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(std::abs(fd[i] - lift.value(z[i])) <= 1e-12);
  }
}

TEST_CASE("conduction lift: continuity and linearity on random stacks") {
  unsigned seed = 12345;
  auto rnd = [&] {
    seed = seed * 1664525u + 1013904223u;
    return (seed >> 8) / double(1u << 24);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    std::vector<double> zs{0.0};
    std::vector<LayerParams> ls;
    for (int j = 0; j < n; ++j) {
      zs.push_back(zs.back() - (0.1 + rnd()));
      ls.push_back({0.1 + rnd(), 0.05 + 0.95 * rnd(), 0.01 + 10 * rnd()});
    }
    const auto s = LayerStack::build(zs, ls, 1.0);
    const BoundaryData bd{4 * rnd() - 2, 4 * rnd() - 2};
    const auto lift = conduction_profile(s, bd);
    const double scale = std::max({std::abs(bd.C0), std::abs(bd.C1), 1.0});
    CHECK(std::abs(lift.value(0.0) - bd.C0) <= 1e-12 * scale);
    CHECK(std::abs(lift.value(-s.depth()) - bd.C1) <= 1e-12 * scale);
    for (int j = 1; j < n; ++j) {
      const double zi = s.interface(j);
      CHECK(std::abs(lift.value_in_layer(j - 1, zi) - lift.value_in_layer(j, zi)) <= 1e-12 * scale);
      const double f_up = s.layer(j - 1).bD() * lift.slope(j - 1);
      const double f_dn = s.layer(j).bD() * lift.slope(j);
      CHECK(std::abs(f_up - f_dn) <= 1e-12 * scale);
    }
    const double c = 2.5;
    const auto scaled = conduction_profile(s, {c * bd.C0, c * bd.C1});
    for (int i = 0; i <= 10; ++i) {
      const double z = -s.depth() * i / 10.0;
      CHECK(std::abs(scaled.value(z) - c * lift.value(z)) <= 1e-13 * c * scale);
    }
  }
  CHECK(conduction_profile(two_layer(), {}).is_zero());
  CHECK(conduction_profile(two_layer(), {}).value(-0.3) == 0.0);
}

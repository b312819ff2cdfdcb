#include "doctest.h"

#include <chrono>
#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

#include "layercon/quadrature.hpp"
#include "layercon/vertical_spectra.hpp"

using namespace layercon;

namespace {

constexpr double kPi = std::numbers::pi;

LayerStack single(double bD = 1.0) { return LayerStack::build({0.0, -1.0}, {{1, 1, bD}}, 1.0); }

LayerStack two_layer(double contrast) {
  return LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {1, 1, contrast}}, 1.0);
}

LayerStack four_layer() {
  return LayerStack::build({0.0, -0.25, -0.5, -0.75, -1.0},
                           {{1, 1, 1}, {2, 0.5, 20}, {1, 1, 0.1}, {1, 0.8, 5}}, 1.0);
}

// Classic RK4 on (v, w = p v') over one constant layer, upward.
std::pair<double, double> rk4_layer(double v, double w, double p, double rho, double kappa,
                                    double lambda, double h, int steps) {
  const double c = p * kappa * kappa - lambda * rho;
  const double dz = h / steps;
  auto f = [&](double a, double b) { return std::pair{b / p, c * a}; };
  for (int i = 0; i < steps; ++i) {
    auto [k1v, k1w] = f(v, w);
    auto [k2v, k2w] = f(v + 0.5 * dz * k1v, w + 0.5 * dz * k1w);
    auto [k3v, k3w] = f(v + 0.5 * dz * k2v, w + 0.5 * dz * k2w);
    auto [k4v, k4w] = f(v + dz * k3v, w + dz * k3w);
    v += dz / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    w += dz / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
  }
  return {v, w};
}

// Gram matrix by per-layer Gauss quadrature, independent of the analytic
// integrals used for normalization.
double gram_deviation(const LayerStack& s, const VerticalBasis& vb, BasisWeight weight) {
  const auto rule = gauss_legendre(80);
  const std::size_t K = vb.size();
  std::vector<double> g(K * K, 0.0);
  for (std::size_t j = 0; j < s.layer_count(); ++j) {
    const double half = 0.5 * s.thickness(j), mid = 0.5 * (s.top(j) + s.bottom(j));
    const double rho = layer_weight(s.layer(j), weight);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double z = mid + half * rule.nodes[q];
      const double w = rule.weights[q] * half * rho;
      for (std::size_t a = 0; a < K; ++a) {
        const double va = vb.function(a).value_in_layer(j, z);
        for (std::size_t b = 0; b < K; ++b) g[a * K + b] += w * va * vb.function(b).value_in_layer(j, z);
      }
    }
  }
  double dev = 0.0;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) dev = std::max(dev, std::abs(g[a * K + b] - (a == b)));
  return dev;
}

struct Richardson {
  std::vector<double> value;
  std::vector<double> order;
};

// Two rounds of Richardson extrapolation over h, h/2, h/4 (even-power error
// expansion), plus the observed order from the first differences.
Richardson fem_extrapolated(const LayerStack& s, double kappa, int K, double density) {
  const auto e1 = fem_oracle_eigs(s, kappa, K, density);
  const auto e2 = fem_oracle_eigs(s, kappa, K, 2 * density);
  const auto e3 = fem_oracle_eigs(s, kappa, K, 4 * density);
  Richardson r;
  for (int k = 0; k < K; ++k) {
    const double r1 = (4 * e2[k] - e1[k]) / 3;
    const double r2 = (4 * e3[k] - e2[k]) / 3;
    r.value.push_back((16 * r2 - r1) / 15);
    r.order.push_back(std::log2((e1[k] - e2[k]) / (e2[k] - e3[k])));
  }
  return r;
}

}  // namespace

TEST_CASE("propagate_layer: ground state and affine regime") {
  const auto s = single();
  TransferState st;
  const auto out = propagate_layer(st, s.layer(0), 1.0, 0.0, kPi * kPi, BasisWeight::unit, false);
  CHECK(std::abs(out.v * std::exp(out.log_scale)) <= 1e-12);
  CHECK(out.crossings == 0);

  const auto aff = propagate_layer(st, {1, 1, 2}, 3.0, 0.0, 0.0);
  CHECK(aff.v * std::exp(aff.log_scale) == doctest::Approx(3.0 / 2.0).epsilon(1e-15));
  CHECK(aff.flux * std::exp(aff.log_scale) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("propagate_layer agrees with RK4 integration across a two-layer stack") {
  const auto s = two_layer(7.0);
  for (double kappa : {0.0, 3.0, 25.0}) {
    for (double lambda : {0.5, 40.0, 300.0, 2000.0}) {
      CAPTURE(kappa);
      CAPTURE(lambda);
      TransferState st;
      double v = 0.0, w = 1.0;
      for (int j = 1; j >= 0; --j) {
        st = propagate_layer(st, s.layer(j), s.thickness(j), kappa, lambda);
        std::tie(v, w) = rk4_layer(v, w, s.layer(j).bD(), 1.0, kappa, lambda, s.thickness(j), 20000);
      }
      const double scale = std::exp(st.log_scale);
      const double mag = std::max(std::abs(v), std::abs(w));
      CHECK(std::abs(st.v * scale - v) <= 1e-9 * mag);
      CHECK(std::abs(st.flux * scale - w) <= 1e-9 * mag);
      const double m = std::max(std::abs(st.v), std::abs(st.flux));
      CHECK(m >= 0.5);
      CHECK(m <= 2.0);
    }
  }
}

TEST_CASE("dispersion count: analytic spectrum and monotonicity") {
  const auto s = single();
  CHECK(dispersion_and_count(s, 0.0, 15.0).count == 1);
  CHECK(dispersion_and_count(s, 0.0, 5.0).count == 0);
  CHECK(dispersion_and_count(s, 0.0, 40.0).count == 2);
  for (int k = 1; k <= 6; ++k) {
    const double lk = k * k * kPi * kPi;
    const auto below = dispersion_and_count(s, 0.0, lk * (1 - 1e-9));
    const auto above = dispersion_and_count(s, 0.0, lk * (1 + 1e-9));
    CHECK(below.count == k - 1);
    CHECK(above.count == k);
    CHECK((below.F < 0) != (above.F < 0));
  }
  for (const auto& st : {single(), two_layer(10.0), four_layer()}) {
    long prev = 0;
    for (int i = 0; i <= 2000; ++i) {
      const long n = dispersion_and_count(st, 2.0, 2.5 * i).count;
      CHECK(n >= prev);
      prev = n;
    }
  }
}

TEST_CASE("dispersion count between oracle eigenvalues") {
  const auto s = two_layer(2.0);
  const auto fem = fem_oracle_eigs(s, 0.0, 6, 4000.0);
  CHECK(dispersion_and_count(s, 0.0, 0.5 * (fem[2] + fem[3])).count == 3);
}

TEST_CASE("analytic spectrum for one layer") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = single();
  const auto vb = find_eigenpairs(s, 0.0, 8);
  for (int k = 1; k <= 8; ++k) {
    CHECK(std::abs(vb.eigenvalue(k - 1) / (k * k * kPi * kPi) - 1) <= 1e-10);
  }
  const double kappa = 2 * kPi;
  const auto vs = find_eigenpairs(s, kappa, 8);
  for (int k = 1; k <= 8; ++k) {
    CHECK(std::abs(vs.eigenvalue(k - 1) / (kappa * kappa + k * k * kPi * kPi) - 1) <= 1e-10);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);

  // sine profile, positive slope at the bottom
  const auto& v1 = vb.function(0);
  for (double z : {-0.9, -0.5, -0.13}) {
    CHECK(std::abs(v1.value(z) - std::sqrt(2.0) * std::sin(kPi * (z + 1))) <= 1e-12);
    CHECK(std::abs(v1.derivative(z) - std::sqrt(2.0) * kPi * std::cos(kPi * (z + 1))) <= 1e-11);
  }
}

TEST_CASE("transfer eigenvalues match the extrapolated FEM oracle") {
  for (const auto& s : {two_layer(2.0), two_layer(100.0), four_layer()}) {
    for (double kappa : {0.0, 2 * kPi}) {
      const auto vb = find_eigenpairs(s, kappa, 8);
      const auto ref = fem_extrapolated(s, kappa, 8, 500.0);
      for (int k = 0; k < 8; ++k) {
        CAPTURE(k);
        CHECK(std::abs(vb.eigenvalue(k) / ref.value[k] - 1) <= 1e-8);
        CHECK(std::abs(ref.order[k] - 2.0) <= 0.2);
      }
    }
  }
}

TEST_CASE("orthonormality, boundary values and transmission") {
  for (const auto& s : {single(), two_layer(10.0), two_layer(100.0), four_layer()}) {
    for (double kappa : {0.0, 5.0, 60.0}) {
      for (auto weight : {BasisWeight::unit, BasisWeight::porosity}) {
        const auto vb = find_eigenpairs(s, kappa, 24, weight);
        CHECK(gram_deviation(s, vb, weight) <= 1e-10);
        for (std::size_t k = 0; k < vb.size(); ++k) {
          const auto& v = vb.function(k);
          const double vmax = std::abs(v.derivative(-1.0)) + 1.0;
          CHECK(std::abs(v.value(0.0)) <= 1e-10 * vmax);
          CHECK(std::abs(v.value(-s.depth())) <= 1e-10 * vmax);
          for (std::size_t j = 1; j < s.layer_count(); ++j) {
            const double z = s.interface(j);
            const double fu = s.layer(j - 1).bD() * v.derivative_in_layer(j - 1, z);
            const double fd = s.layer(j).bD() * v.derivative_in_layer(j, z);
            double fscale = 0.0;
            for (std::size_t i = 0; i < s.layer_count(); ++i)
              fscale = std::max(fscale, std::abs(s.layer(i).bD() * v.derivative_in_layer(i, s.top(i))));
            CHECK(std::abs(v.value_in_layer(j - 1, z) - v.value_in_layer(j, z)) <= 1e-10 * (1 + fscale));
            CHECK(std::abs(fu - fd) <= 1e-10 * fscale);
          }
          if (k > 0) CHECK(vb.eigenvalue(k) > vb.eigenvalue(k - 1));
        }
        CHECK(vb.eigenvalue(0) > 0.0);
      }
    }
  }
}

TEST_CASE("derivative jumps by the coefficient ratio") {
  const auto s = two_layer(10.0);
  const auto vb = find_eigenpairs(s, 0.0, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& v = vb.function(k);
    const double up = v.derivative_in_layer(0, -0.5), dn = v.derivative_in_layer(1, -0.5);
    if (std::abs(dn) < 1e-6) continue;
    CHECK(std::abs(up / dn - 10.0) <= 1e-8);
  }
}

TEST_CASE("pointwise operator residual by finite differences") {
  for (const auto& s : {two_layer(10.0), four_layer()}) {
    const double kappa = 3.0;
    const auto vb = find_eigenpairs(s, kappa, 8);
    const double h = 2e-3;
    for (std::size_t k = 0; k < 8; ++k) {
      const auto& v = vb.function(k);
      const double lam = vb.eigenvalue(k);
      for (std::size_t j = 0; j < s.layer_count(); ++j) {
        const double p = s.layer(j).bD();
        for (int i = 1; i < 8; ++i) {
          const double z = s.bottom(j) + s.thickness(j) * i / 8.0;
          auto f = [&](double x) { return v.value_in_layer(j, x); };
          auto d2 = [&](double hh) {
            return (-f(z + 2 * hh) + 16 * f(z + hh) - 30 * f(z) + 16 * f(z - hh) - f(z - 2 * hh)) /
                   (12 * hh * hh);
          };
          // one Richardson step on the fourth-order stencil
          const double vzz = (16 * d2(h / 2) - d2(h)) / 15;
          const double terms[3] = {-p * vzz, p * kappa * kappa * f(z), -lam * f(z)};
          const double res = terms[0] + terms[1] + terms[2];
          const double scale = std::abs(terms[0]) + std::abs(terms[1]) + std::abs(terms[2]);
          CHECK(std::abs(res) <= 1e-8 * scale);
        }
      }
    }
  }
}

TEST_CASE("eigenvalues grow with the wavenumber") {
  const auto s = four_layer();
  std::vector<double> prev;
  for (double kappa : {0.0, 1.0, 4.0, 16.0, 64.0}) {
    const auto vb = find_eigenpairs(s, kappa, 10);
    if (!prev.empty()) {
      for (int k = 0; k < 10; ++k) CHECK(vb.eigenvalue(k) >= prev[k]);
    }
    prev = vb.eigenvalues();
  }
}

TEST_CASE("deep spectra on a high-contrast stack stay well posed") {
  const auto s = LayerStack::build({0.0, -0.1, -0.9, -1.0}, {{1, 1, 0.01}, {1, 1, 1}, {1, 1, 0.01}}, 1.0);
  const auto vb = find_eigenpairs(s, 200.0, 64);
  CHECK(vb.size() == 64);
  CHECK(gram_deviation(s, vb, BasisWeight::unit) <= 1e-10);
  // the two outer layers are decoupled to below double resolution, so
  // eigenvalues may repeat but never decrease
  for (std::size_t k = 1; k < vb.size(); ++k) CHECK(vb.eigenvalue(k) >= vb.eigenvalue(k - 1));
  for (std::size_t k = 0; k < vb.size(); ++k) {
    CHECK(std::abs(vb.function(k).value(0.0)) <= 1e-10 * (1 + std::abs(vb.function(k).derivative(0.0))));
  }
}

TEST_CASE("FEM oracle: P1 order on one layer and mesh alignment") {
  const auto s = single();
  const double e1 = fem_oracle_eigs(s, 0.0, 1, 50.0)[0] - kPi * kPi;
  const double e2 = fem_oracle_eigs(s, 0.0, 1, 100.0)[0] - kPi * kPi;
  CHECK(e1 > 0.0);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.01));

  const auto t = two_layer(2.0);
  std::vector<double> bad{-1.0, -0.7, -0.3, 0.0};
  CHECK_THROWS_AS(fem_oracle_eigs(t, 0.0, 1, bad), ConfigError);
  std::vector<double> good{-1.0, -0.75, -0.5, -0.25, 0.0};
  CHECK(fem_oracle_eigs(t, 0.0, 2, good).size() == 2);
}

TEST_CASE("find_eigenpairs rejects Kmax < 1") {
  CHECK_THROWS_AS(find_eigenpairs(single(), 0.0, 0), ConfigError);
}

TEST_CASE("traces match pointwise evaluation") {
  const auto s = two_layer(3.0);
  const auto vb = find_eigenpairs(s, 1.0, 4);
  const std::vector<double> z{-0.9, -0.6, -0.4, -0.1};
  const std::vector<std::size_t> layer{1, 1, 0, 0};
  const auto tr = vb.traces(z, layer);
  for (std::size_t q = 0; q < z.size(); ++q) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(tr.value(q, k) == vb.function(k).value(z[q]));
      CHECK(tr.derivative(q, k) == vb.function(k).derivative(z[q]));
    }
  }
}

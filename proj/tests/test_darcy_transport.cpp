#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "layercon/darcy_transport.hpp"

using namespace layercon;

namespace {

LayerStack single(double b = 1.0) { return LayerStack::build({0.0, -1.0}, {{1, b, 1}}, 1.0); }
LayerStack two_layer(double contrast = 2.0) {
  return LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {2, 1, contrast}}, 1.0);
}
LayerStack three_layer() {
  return LayerStack::build({0.0, -0.3, -0.7, -1.0}, {{1, 1, 1}, {3, 1, 0.5}, {0.5, 1, 2}}, 1.0);
}

PhysicalConstants buoyant(double alpha = 1.0) {
  PhysicalConstants k;
  k.alpha = alpha;
  return k;
}

SpectralField random_field(const SpectralSpace& sp, unsigned seed, double amp) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  auto f = sp.zeros();
  for (std::size_t m = 0; m <= sp.grid().dealias_limit(); ++m) {
    for (std::size_t k = 0; k < std::min<std::size_t>(6, sp.kmax()); ++k) {
      const double s = amp / ((1.0 + m) * (1.0 + k));
      f.c(m, k) = {s * n(rng), m == 0 ? 0.0 : s * n(rng)};
    }
  }
  f.nodal_valid = false;
  return f;
}

double max_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double extrapolate(const double* z, const double* f, double at) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (at - z[b]) / (z[a] - z[b]);
    s += l * f[a];
  }
  return s;
}

// Jump across interface j of a nodal column, each side extrapolated from
// its 4 nearest Gauss nodes.
double column_jump(const Grid& g, const std::vector<double>& nodal, std::size_t i, std::size_t j) {
  const double zi = g.stack().interface(j);
  const std::size_t above = g.layer_begin(j - 1);
  double zb[4], fb[4], za[4], fa[4];
  for (std::size_t a = 0; a < 4; ++a) {
    const std::size_t qb = above - 1 - a, qa = above + a;
    zb[a] = g.z()[qb];
    fb[a] = nodal[qb * g.nx() + i];
    za[a] = g.z()[qa];
    fa[a] = nodal[qa * g.nx() + i];
  }
  return extrapolate(za, fa, zi) - extrapolate(zb, fb, zi);
}

double modal_inner(const SpectralSpace& sp, const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t m = 0; m < sp.modes(); ++m)
    for (std::size_t k = 0; k < sp.kmax(); ++k)
      s += (m == 0 ? 1.0 : 2.0) * (std::conj(a[m * sp.kmax() + k]) * b[m * sp.kmax() + k]).real();
  return s * sp.grid().width();
}

// Exact pressure for phi = v_{m,k} (unit basis): per layer
//   P = (c bD / lambda) v' + A cosh(kappa (z - mid)) + B sinh(kappa (z - mid)),
// with P and (K/mu)(P' + c v) continuous and zero flux at both ends.
struct ExactPressure {
  const LayerStack& s;
  const Eigenfunction& v;
  double lam, kappa, c, mu;
  std::vector<double> A, B;

  ExactPressure(const LayerStack& st, const VerticalBasis& basis, std::size_t k, double cc, double mu_)
      : s(st), v(basis.function(k)), lam(basis.eigenvalue(k)), kappa(basis.kappa()), c(cc), mu(mu_) {
    const std::size_t n = s.layer_count();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * n);
    // row helpers: homogeneous value/flux coefficients, particular value/flux
    auto hom = [&](std::size_t j, double z, double out[4]) {
      const double t = kappa * (z - 0.5 * (s.top(j) + s.bottom(j)));
      const double a = s.layer(j).K / mu;
      out[0] = std::cosh(t);
      out[1] = std::sinh(t);
      out[2] = a * kappa * std::sinh(t);
      out[3] = a * kappa * std::cosh(t);
    };
    double h[4];
    std::size_t row = 0;
    hom(0, 0.0, h);
    M(row, 0) = h[2];
    M(row, 1) = h[3];
    r(row++) = -part_flux(0, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      const double z = s.interface(j);
      double hb[4];
      hom(j - 1, z, h);
      hom(j, z, hb);
      M(row, 2 * (j - 1)) = h[0];
      M(row, 2 * (j - 1) + 1) = h[1];
      M(row, 2 * j) = -hb[0];
      M(row, 2 * j + 1) = -hb[1];
      r(row++) = part_value(j, z) - part_value(j - 1, z);
      M(row, 2 * (j - 1)) = h[2];
      M(row, 2 * (j - 1) + 1) = h[3];
      M(row, 2 * j) = -hb[2];
      M(row, 2 * j + 1) = -hb[3];
      r(row++) = part_flux(j, z) - part_flux(j - 1, z);
    }
    hom(n - 1, -s.depth(), h);
    M(row, 2 * (n - 1)) = h[2];
    M(row, 2 * (n - 1) + 1) = h[3];
    r(row++) = -part_flux(n - 1, -s.depth());
    const Eigen::VectorXd x = M.fullPivLu().solve(r);
    for (std::size_t j = 0; j < n; ++j) {
      A.push_back(x(2 * j));
      B.push_back(x(2 * j + 1));
    }
  }
  double part_value(std::size_t j, double z) const {
    return c * s.layer(j).bD() / lam * v.derivative_in_layer(j, z);
  }
  double part_flux(std::size_t j, double z) const {
    return s.layer(j).K / mu * c * s.layer(j).bD() * kappa * kappa / lam * v.value_in_layer(j, z);
  }
  double value(std::size_t j, double z) const {
    const double t = kappa * (z - 0.5 * (s.top(j) + s.bottom(j)));
    return part_value(j, z) + A[j] * std::cosh(t) + B[j] * std::sinh(t);
  }
};

}  // namespace

TEST_CASE("zero concentration gives zero pressure and velocity") {
  const Grid g(two_layer(), 16, 24);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(), BoundaryData{});
  const FlowState s = model.make_state(sp.zeros());
  for (std::size_t m = 0; m < sp.modes(); ++m) {
    CHECK(max_abs(s.pressure.re[m]) == 0.0);
    CHECK(max_abs(s.pressure.im[m]) == 0.0);
  }
  CHECK(max_abs(s.ux) == 0.0);
  CHECK(max_abs(s.uz) == 0.0);
  const auto n = model.advection_term(s.phi_hom, s.ux, s.uz);
  for (const auto& c : n) CHECK(c == cplx{});
}

TEST_CASE("horizontally uniform concentration is hydrostatic") {
  const LayerStack st = three_layer();
  const Grid g(st, 16, 32);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const PhysicalConstants k = buoyant(2.0);
  const double c = k.buoyancy();
  auto f = sp.zeros();
  f.c(0, 0) = 1.0;
  f.c(0, 2) = -0.4;
  f.nodal_valid = false;

  std::vector<double> errs;
  for (int n : {8, 16, 32, 64}) {
    const DarcyModel model(sp, k, BoundaryData{0.3, 1.0}, ElementSpec{2, n});
    const FlowState s = model.make_state(f);
    // exact velocity is zero; max |u| is bounded against c max |phi|
    const double phimax = max_abs(model.total_phi_nodal(s));
    CHECK(max_abs(s.ux) <= 1e-8 * c * phimax);
    CHECK(max_abs(s.uz) <= 1e-8 * c * phimax);
    // P' = -c phi (phi including the lift), densely sampled per layer
    double err = 0.0;
    for (std::size_t j = 0; j < st.layer_count(); ++j) {
      for (int i = 0; i <= 400; ++i) {
        const double z = st.bottom(j) + st.thickness(j) * i / 400.0;
        const double phi = f.c(0, 0).real() * sp.basis(0).function(0).value_in_layer(j, z) +
                           f.c(0, 2).real() * sp.basis(0).function(2).value_in_layer(j, z) +
                           model.lift().value_in_layer(j, z);
        err = std::max(err, std::abs(model.pressure_solver(0).derivative(s.pressure.re[0], j, z) + c * phi));
      }
    }
    errs.push_back(err);
    // zero vertical mean of the mode-0 pressure
    CHECK(std::abs(model.pressure_solver(0).integral(s.pressure.re[0])) <= 1e-12);
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    const double order = std::log2(errs[i - 1] / errs[i]);
    CHECK(order >= 1.8);
  }
}

TEST_CASE("velocity is linear in the concentration") {
  const Grid g(two_layer(), 16, 24);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(), BoundaryData{});
  const auto f1 = random_field(sp, 1, 1.0), f2 = random_field(sp, 2, 1.0);
  const double a = 1.7, b = -0.6;
  auto mix = sp.zeros();
  for (std::size_t i = 0; i < mix.modal.size(); ++i) mix.modal[i] = a * f1.modal[i] + b * f2.modal[i];
  mix.nodal_valid = false;
  const FlowState s1 = model.make_state(f1), s2 = model.make_state(f2), sm = model.make_state(mix);
  double dx = 0.0, dz = 0.0;
  for (std::size_t i = 0; i < sm.ux.size(); ++i) {
    dx = std::max(dx, std::abs(sm.ux[i] - (a * s1.ux[i] + b * s2.ux[i])));
    dz = std::max(dz, std::abs(sm.uz[i] - (a * s1.uz[i] + b * s2.uz[i])));
  }
  CHECK(max_abs(sm.uz) > 0.1);
  CHECK(dx <= 1e-12 * max_abs(sm.ux));
  CHECK(dz <= 1e-12 * max_abs(sm.uz));
}

TEST_CASE("vertical velocity vanishes at top and bottom under refinement") {
  const Grid g(two_layer(), 16, 32);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const auto f = random_field(sp, 3, 1.0);
  const std::size_t nz = g.nz();
  std::vector<double> ends;
  double scale = 0.0;
  for (int n : {16, 32, 64}) {
    const DarcyModel model(sp, buoyant(), BoundaryData{}, ElementSpec{2, n});
    const FlowState s = model.make_state(f);
    scale = max_abs(s.uz);
    double worst = 0.0;
    for (int i = 0; i < g.nx(); ++i) {
      double zt[4], ft[4], zb[4], fb[4];
      for (std::size_t a = 0; a < 4; ++a) {
        zt[a] = g.z()[nz - 1 - a];
        ft[a] = s.uz[(nz - 1 - a) * g.nx() + i];
        zb[a] = g.z()[a];
        fb[a] = s.uz[a * g.nx() + i];
      }
      worst = std::max({worst, std::abs(extrapolate(zt, ft, 0.0)), std::abs(extrapolate(zb, fb, -1.0))});
    }
    ends.push_back(worst);
  }
  for (std::size_t i = 1; i < ends.size(); ++i) CHECK(std::log2(ends[i - 1] / ends[i]) >= 1.8);
  CHECK(ends.back() <= 1e-4 * scale);
}

TEST_CASE("manufactured layered pressure and interface residuals converge") {
  const LayerStack st = LayerStack::build({0.0, -0.4, -1.0}, {{1, 1, 1}, {4, 1, 10}}, 2.0);
  const Grid g(st, 8, 48);
  const SpectralSpace sp(g, 6, BasisWeight::unit);
  const PhysicalConstants k = buoyant(1.5);
  const std::size_t m = 1, kk = 2;
  const ExactPressure exact(st, sp.basis(m), kk, k.buoyancy(), k.mu);
  auto f = sp.zeros();
  f.c(m, kk) = 1.0;
  f.nodal_valid = false;

  struct Level {
    double perr, uz_jump, p_jump;
  };
  auto measure = [&](ElementSpec spec) {
    const DarcyModel model(sp, k, BoundaryData{}, spec);
    const FlowState s = model.make_state(f);
    double e = 0.0;
    for (std::size_t j = 0; j < st.layer_count(); ++j) {
      for (int i = 0; i <= 40; ++i) {
        const double z = st.bottom(j) + st.thickness(j) * i / 40.0;
        e = std::max(e, std::abs(model.pressure_solver(m).value(s.pressure.re[m], j, z) - exact.value(j, z)));
      }
    }
    CHECK(max_abs(s.pressure.im[m]) == 0.0);
    return Level{e, std::abs(column_jump(g, s.uz, 0, 1)),
                 std::abs(column_jump(g, model.pressure_nodal(s.pressure), 0, 1))};
  };

  std::vector<Level> cubic;
  for (int n : {4, 8, 16, 32}) cubic.push_back(measure(ElementSpec{3, n}));
  for (std::size_t i = 1; i < cubic.size(); ++i) {
    CHECK(std::log2(cubic[i - 1].perr / cubic[i].perr) >= 3.5);
    CHECK(std::log2(cubic[i - 1].uz_jump / cubic[i].uz_jump) >= 2.8);
  }
  CHECK(cubic.back().perr <= 2e-7);
  for (const auto& l : cubic) CHECK(l.p_jump <= 1e-8);

  // quadratic elements: second order for the flux jump once asymptotic
  std::vector<Level> quad;
  for (int n : {128, 256, 512}) quad.push_back(measure(ElementSpec{2, n}));
  for (std::size_t i = 1; i < quad.size(); ++i) {
    CHECK(std::log2(quad[i - 1].perr / quad[i].perr) >= 2.8);
    CHECK(std::log2(quad[i - 1].uz_jump / quad[i].uz_jump) >= 1.8);
  }
}

TEST_CASE("weak divergence defect decreases under elliptic refinement") {
  const Grid g(two_layer(5.0), 16, 32);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const auto f = random_field(sp, 9, 1.0);
  std::vector<double> d;
  for (int n : {4, 8, 16, 32}) {
    const DarcyModel model(sp, buoyant(), BoundaryData{}, ElementSpec{2, n});
    d.push_back(model.div_defect(model.make_state(f)));
  }
  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < 0.5 * d[i - 1]);
}

TEST_CASE("skew advection does no work on the concentration") {
  for (const auto& st : {single(), two_layer(10.0), three_layer()}) {
    const Grid g(st, 24, 24);
    const SpectralSpace sp(g, 8, BasisWeight::unit);
    const DarcyModel model(sp, buoyant(3.0), BoundaryData{0.0, 1.0});
    for (unsigned seed = 0; seed < 20; ++seed) {
      const FlowState s = model.make_state(random_field(sp, 100 + seed, 1.0));
      const auto n = model.advection_term(s.phi_hom, s.ux, s.uz);
      const Norms nm = sp.norms(s.phi_hom);
      CHECK(max_abs(s.uz) > 0.0);
      CHECK(std::abs(modal_inner(sp, s.phi_hom.modal, n)) <= 1e-8 * nm.L2 * nm.V);
      for (std::size_t i = (g.dealias_limit() + 1) * sp.kmax(); i < n.size(); ++i) CHECK(n[i] == cplx{});
    }
  }
}

TEST_CASE("one implicit Euler step of pure diffusion") {
  const double b = 0.5;
  const Grid g(single(b), 8, 16);
  const SpectralSpace sp(g, 4, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(0.0), BoundaryData{});
  CHECK(model.beta() == b);
  auto f = sp.zeros();
  f.c(0, 0) = 1.0;
  f.nodal_valid = false;
  const FlowState s0 = model.make_state(f);
  StepperConfig cfg;
  cfg.dt = 0.01;
  cfg.scheme = Scheme::imex_euler;
  const FlowState s1 = model.step(s0, cfg);
  const double lam = sp.basis(0).eigenvalue(0);
  CHECK(s1.phi_hom.c(0, 0).real() == doctest::Approx(1.0 / (1.0 + cfg.dt * lam / b)).epsilon(1e-15));
  CHECK(s1.t == cfg.dt);
  CHECK(s1.step == 1);
}

TEST_CASE("mode-0 eigenfunction decays exactly with buoyancy on") {
  const LayerStack st = two_layer(3.0);
  const Grid g(st, 8, 24);
  const SpectralSpace sp(g, 6, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(5.0), BoundaryData{});
  const double lam = sp.basis(0).eigenvalue(0);
  auto f = sp.zeros();
  f.c(0, 0) = 1.0;
  f.nodal_valid = false;
  FlowState s = model.make_state(f);
  StepperConfig cfg;
  cfg.dt = 1e-4 / lam;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    s = model.step(s, cfg);
    worst = std::max(worst, std::abs(s.phi_hom.c(0, 0).real() - std::exp(-lam * s.t)));
    CHECK(max_abs(s.uz) == 0.0);
  }
  CHECK(s.t == doctest::Approx(1.0 / lam).epsilon(1e-12));
  CHECK(worst <= 1e-8);
}

TEST_CASE("time self-convergence: first and second order") {
  const Grid g(two_layer(2.0), 16, 24);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(20.0), BoundaryData{});
  const FlowState s0 = model.make_state(random_field(sp, 5, 1.0));
  const double T = 0.02;
  auto run = [&](Scheme sch, int steps) {
    StepperConfig cfg;
    cfg.scheme = sch;
    cfg.dt = T / steps;
    FlowState s = s0;
    for (int i = 0; i < steps; ++i) s = model.step(s, cfg);
    return s.phi_hom.modal;
  };
  for (Scheme sch : {Scheme::imex_euler, Scheme::imex_cn}) {
    const auto ref = run(sch, 8 * 64);
    std::vector<double> err;
    for (int n : {8, 16, 32}) {
      const auto c = run(sch, n);
      double e = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) e = std::max(e, std::abs(c[i] - ref[i]));
      err.push_back(e);
    }
    const double want = sch == Scheme::imex_euler ? 1.0 : 2.0;
    for (std::size_t i = 1; i < err.size(); ++i) {
      CHECK(std::log2(err[i - 1] / err[i]) == doctest::Approx(want).epsilon(0.15));
    }
  }
}

TEST_CASE("discrete energy law residual") {
  const Grid g(two_layer(2.0), 16, 24);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(20.0), BoundaryData{});
  const FlowState s0 = model.make_state(random_field(sp, 11, 1.0));
  std::vector<double> worst;
  for (int n : {10, 20, 40}) {
    StepperConfig cfg;
    cfg.dt = 0.01 / n;
    FlowState s = s0;
    EnergyTerms e0 = model.energy_terms(s);
    double w = 0.0;
    for (int i = 0; i < n; ++i) {
      FlowState next = model.step(s, cfg);
      const EnergyTerms e1 = model.energy_terms(next);
      CHECK(e1.energy <= e0.energy);
      const double r = (e1.energy - e0.energy) / cfg.dt + e0.dissipation + e1.dissipation;
      w = std::max(w, std::abs(r));
      e0 = e1;
      s = std::move(next);
    }
    worst.push_back(w);
  }
  for (std::size_t i = 1; i < worst.size(); ++i) {
    CHECK(std::log2(worst[i - 1] / worst[i]) == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("layered porosity needs the porosity basis") {
  const auto st = LayerStack::build({0.0, -0.5, -1.0}, {{1, 0.5, 1}, {1, 0.8, 1}}, 1.0);
  const Grid g(st, 8, 16);
  const SpectralSpace unit(g, 4, BasisWeight::unit);
  CHECK_THROWS_AS(DarcyModel(unit, buoyant(), BoundaryData{}), ConfigError);
  const SpectralSpace por(g, 4, BasisWeight::porosity);
  const DarcyModel model(por, buoyant(0.0), BoundaryData{});
  CHECK(model.beta() == 1.0);
  auto f = por.zeros();
  f.c(0, 1) = 1.0;
  f.nodal_valid = false;
  const FlowState s = model.make_state(f);
  // integral b v^2 = 1 for the porosity-normalized basis
  CHECK(model.energy_terms(s).energy == doctest::Approx(1.0).epsilon(1e-12));
  StepperConfig cfg;
  cfg.scheme = Scheme::imex_euler;
  const FlowState s1 = model.step(s, cfg);
  CHECK(s1.phi_hom.c(0, 1).real() ==
        doctest::Approx(1.0 / (1.0 + cfg.dt * por.basis(0).eigenvalue(1))).epsilon(1e-15));
}

TEST_CASE("CFL flag and adaptive step") {
  const Grid g(two_layer(), 16, 24);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(50.0), BoundaryData{});
  const FlowState s = model.make_state(random_field(sp, 4, 1.0));
  const double rate = model.advective_rate(s);
  REQUIRE(rate > 0.0);
  StepperConfig cfg;
  cfg.cfl_target = 0.1;
  cfg.dt = 1.0 / rate;
  const FlowState a = model.step(s, cfg);
  CHECK(a.cfl_exceeded);
  CHECK(a.cfl == doctest::Approx(1.0));
  cfg.adaptive = true;
  const FlowState b = model.step(s, cfg);
  CHECK_FALSE(b.cfl_exceeded);
  CHECK(b.dt == doctest::Approx(0.1 / rate));
  CHECK(b.cfl <= 0.1 * (1 + 1e-12));
}

TEST_CASE("non-finite state is a hard error carrying the last state") {
  const Grid g(single(), 8, 16);
  const SpectralSpace sp(g, 4, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(), BoundaryData{});
  FlowState s = model.make_state(random_field(sp, 1, 1.0));
  s.phi_hom.c(1, 1) = {std::nan(""), 0.0};
  try {
    (void)model.step(s, StepperConfig{});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    REQUIRE(e.last_valid);
    CHECK(e.last_valid->step == s.step);
  }
  StepperConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS((void)model.step(model.make_state(sp.zeros()), bad), ConfigError);
}

TEST_CASE("checkpoint round trip and restart") {
  const Grid g(two_layer(), 16, 24);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(10.0), BoundaryData{0.0, 1.0});
  StepperConfig cfg;
  cfg.dt = 1e-3;
  FlowState s = model.make_state(random_field(sp, 8, 0.5));
  for (int i = 0; i < 5; ++i) s = model.step(s, cfg);

  const auto path = std::filesystem::temp_directory_path() / "layercon_test.chk";
  write_checkpoint(path, s, model);
  const FlowState r = read_checkpoint(path, model);
  CHECK(r.t == s.t);
  CHECK(r.step == s.step);
  CHECK(r.dt == s.dt);
  CHECK(r.phi_hom.modal == s.phi_hom.modal);
  CHECK(r.phi_hom.nodal == s.phi_hom.nodal);
  CHECK(r.uz == s.uz);

  FlowState a = s, b = r;
  for (int i = 0; i < 5; ++i) {
    a = model.step(a, cfg);
    b = model.step(b, cfg);
  }
  CHECK(a.phi_hom.modal == b.phi_hom.modal);

  const DarcyModel other(sp, buoyant(10.0), BoundaryData{0.0, 1.0}, ElementSpec{2, 8});
  CHECK_NOTHROW(read_checkpoint(path, other));
  const Grid g2(two_layer(3.0), 16, 24);
  const SpectralSpace sp2(g2, 8, BasisWeight::unit);
  const DarcyModel mismatch(sp2, buoyant(), BoundaryData{});
  CHECK_THROWS_AS(read_checkpoint(path, mismatch), ConfigError);
  std::filesystem::remove(path);
}

#include "layercon/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <unistd.h>

#include <Eigen/Dense>

#include "layercon/commands.hpp"
#include "layercon/diagnostics.hpp"
#include "layercon/output.hpp"
#include "layercon/quadrature.hpp"
#include "layercon/simulation.hpp"
#include "layercon/text.hpp"

namespace layercon {

namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

double max_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

LayerStack two_layer(double contrast) {
  return LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {1, 1, contrast}}, 1.0);
}

LayerStack four_layer() {
  return LayerStack::build({0.0, -0.25, -0.5, -0.75, -1.0},
                           {{1, 1, 1}, {2, 0.5, 20}, {1, 1, 0.1}, {1, 0.8, 5}}, 1.0);
}

PhysicalConstants buoyant(double alpha) {
  PhysicalConstants k;
  k.alpha = alpha;
  return k;
}

SpectralField random_field(const SpectralSpace& sp, unsigned seed, double amp, std::size_t band) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  auto f = sp.zeros();
  for (std::size_t m = 0; m <= std::min(band, sp.grid().dealias_limit()); ++m) {
    for (std::size_t k = 0; k <= std::min(band, sp.kmax() - 1); ++k) {
      const double s = amp / ((1.0 + m) * (1.0 + k));
      f.c(m, k) = {s * n(rng), m == 0 ? 0.0 : s * n(rng)};
    }
  }
  f.nodal_valid = false;
  return f;
}

struct Outcome {
  bool passed;
  std::string measured;
};

// 1
Outcome analytic_spectrum() {
  const auto s = LayerStack::build({0.0, -1.0}, {{1, 1, 1}}, 1.0);
  double worst = 0.0;
  for (double kappa : {0.0, 2 * kPi}) {
    const auto vb = find_eigenpairs(s, kappa, 8);
    for (int k = 1; k <= 8; ++k) {
      const double exact = kappa * kappa + k * k * kPi * kPi;
      worst = std::max(worst, std::abs(vb.eigenvalue(k - 1) / exact - 1));
    }
  }
  return {worst <= 1e-10, "max relative error " + sci(worst) + " (tol 1e-10)"};
}

// 2
Outcome oracle_equivalence() {
  double worst = 0.0, omin = 1e300, omax = -1e300;
  for (const auto& s : {two_layer(2.0), two_layer(100.0), four_layer()}) {
    for (double kappa : {0.0, 2 * kPi}) {
      const auto vb = find_eigenpairs(s, kappa, 8);
      const auto e1 = fem_oracle_eigs(s, kappa, 8, 500.0);
      const auto e2 = fem_oracle_eigs(s, kappa, 8, 1000.0);
      const auto e3 = fem_oracle_eigs(s, kappa, 8, 2000.0);
      for (int k = 0; k < 8; ++k) {
        const double r1 = (4 * e2[k] - e1[k]) / 3, r2 = (4 * e3[k] - e2[k]) / 3;
        const double ref = (16 * r2 - r1) / 15;
        worst = std::max(worst, std::abs(vb.eigenvalue(k) / ref - 1));
        const double order = std::log2((e1[k] - e2[k]) / (e2[k] - e3[k]));
        omin = std::min(omin, order);
        omax = std::max(omax, order);
      }
    }
  }
  const bool ok = worst <= 1e-8 && omin >= 1.8 && omax <= 2.2;
  return {ok, "max relative deviation " + sci(worst) + " (tol 1e-8); FEM order in [" + sci(omin) + ", " +
                  sci(omax) + "] (want 2.0 +- 0.2)"};
}

// Gram matrix by an 80-point Gauss rule per layer.
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
    for (std::size_t b = 0; b < K; ++b) dev = std::max(dev, std::abs(g[a * K + b] - (a == b ? 1.0 : 0.0)));
  return dev;
}

// 3
Outcome orthonormality_transmission() {
  double gram = 0.0;
  for (const auto& s : {two_layer(10.0), two_layer(100.0), four_layer()}) {
    for (double kappa : {0.0, 5.0, 60.0}) {
      for (auto w : {BasisWeight::unit, BasisWeight::porosity}) {
        gram = std::max(gram, gram_deviation(s, find_eigenpairs(s, kappa, 24, w), w));
      }
    }
  }
  // flux and derivative jumps from the Gauss nodes, extrapolated to the interface
  const LayerStack st = two_layer(10.0);
  const Grid g(st, 8, 96);
  const SpectralSpace sp(g, 8, BasisWeight::unit);
  double flux_jump = 0.0, ratio_err = 0.0;
  for (std::size_t m : {std::size_t{0}, std::size_t{1}}) {
    for (std::size_t k = 0; k < sp.kmax(); ++k) {
      auto f = sp.zeros();
      f.c(m, k) = 1.0;
      f.nodal_valid = false;
      std::vector<double> fx, fz;
      sp.gradient_nodal(f, fx, fz);
      double scale = 0.0;
      for (std::size_t q = 0; q < g.nz(); ++q)
        scale = std::max(scale, std::abs(st.layer(g.node_layers()[q]).bD() * fz[q * 8]));
      const double above = one_sided_limit(g, fz, 0, 1, true), below = one_sided_limit(g, fz, 0, 1, false);
      flux_jump = std::max(flux_jump, std::abs(st.layer(0).bD() * above - st.layer(1).bD() * below) / scale);
      if (std::abs(st.layer(1).bD() * below) > 1e-3 * scale) ratio_err = std::max(ratio_err, std::abs(above / below / 10.0 - 1));
    }
  }
  const bool ok = gram <= 1e-10 && flux_jump <= 1e-6 && ratio_err <= 1e-6;
  return {ok, "Gram deviation " + sci(gram) + " (tol 1e-10); flux jump " + sci(flux_jump) +
                  " relative (tol 1e-6); derivative ratio error " + sci(ratio_err) + " against 10 (tol 1e-6)"};
}

// 4
Outcome hydrostatic() {
  const auto st = LayerStack::build({0.0, -0.3, -0.7, -1.0}, {{1, 1, 1}, {3, 1, 0.5}, {0.5, 1, 2}}, 1.0);
  const Grid g(st, 16, 32);
  const SpectralSpace sp(g, 12, BasisWeight::unit);
  const PhysicalConstants k = buoyant(2.0);
  const DarcyModel model(sp, k, BoundaryData{0.3, 1.0});
  // a profile in z only, given on the nodes; roundoff reaches every mode
  std::vector<double> nodal(g.size());
  for (std::size_t q = 0; q < g.nz(); ++q) {
    const double z = g.z()[q];
    for (int i = 0; i < g.nx(); ++i) nodal[q * g.nx() + i] = std::sin(kPi * z) * (1.0 + 0.5 * std::cos(3.0 * z));
  }
  const FlowState s = model.make_state(sp.from_nodal(nodal));
  const double bound = k.buoyancy() * max_abs(model.total_phi_nodal(s));
  const double u = std::max(max_abs(s.ux), max_abs(s.uz));
  return {u <= 1e-8 * bound, "max |u| " + sci(u) + " against 1e-8 c max|phi| = " + sci(1e-8 * bound)};
}

// 5
Outcome exact_decay() {
  const double b = 0.6;
  const auto st = LayerStack::build({0.0, -0.5, -1.0}, {{1, b, 1}, {2, b, 3}}, 1.0);
  const Grid g(st, 8, 24);
  const SpectralSpace sp(g, 6, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(5.0), BoundaryData{});
  const double lam = sp.basis(0).eigenvalue(0);
  auto f = sp.zeros();
  f.c(0, 0) = 1.0;
  f.nodal_valid = false;
  StepperConfig cfg;
  cfg.scheme = Scheme::imex_cn;
  cfg.dt = 1e-4 / lam;
  RunSchedule sched;
  sched.sample_every = 1000;
  const RunResult r = run(model, model.make_state(f), cfg, 1.0 / lam, sched);
  const double E0 = r.records.front().E, E1 = r.records.back().E;
  const double exact = E0 * std::exp(-2.0 / b);
  const double err = std::abs(E1 / exact - 1);
  return {err <= 1e-6, "E(1/lambda_1) relative error " + sci(err) + " (tol 1e-6) after " +
                           std::to_string(r.final_state.step) + " steps"};
}

struct SeededSetup {
  LayerStack stack = LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {2, 1, 2}}, 1.0);
  Grid grid{stack, 16, 24};
  SpectralSpace space{grid, 8, BasisWeight::unit};
  DarcyModel model{space, buoyant(20.0), BoundaryData{}};
};

// 6
Outcome energy_law() {
  const SeededSetup su;
  double omin = 1e300, omax = -1e300;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const FlowState s0 = su.model.make_state(random_field(su.space, seed, 1.0, 5));
    std::vector<double> worst;
    // coarsest level at CFL below 1
    for (int n : {40, 80, 160, 320}) {
      StepperConfig cfg;
      cfg.dt = 0.01 / n;
      const RunResult r = run(su.model, s0, cfg, 0.01);
      worst.push_back(r.max_energy_residual);
    }
    for (std::size_t i = 1; i < worst.size(); ++i) {
      const double o = std::log2(worst[i - 1] / worst[i]);
      omin = std::min(omin, o);
      omax = std::max(omax, o);
    }
  }
  return {omin >= 1.7 && omax <= 2.3,
          "residual order in [" + sci(omin) + ", " + sci(omax) + "] over 5 seeds (want 2.0 +- 0.3)"};
}

// 7
Outcome maximum_principle() {
  const SeededSetup su;
  const double lam = su.space.basis(0).eigenvalue(0);
  double over = -1e300, l4 = -1e300;
  bool ok = true;
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const FlowState s0 = su.model.make_state(random_field(su.space, seed, 1.0, 5));
    StepperConfig cfg;
    cfg.dt = 2e-3;
    const RunResult r = run(su.model, s0, cfg, 5.0 / lam);
    TrajectoryPolicy p = default_policy(r.records.front(), su.model.boundary());
    p.check_energy = false;
    p.check_ratio_band = false;
    const TrajectoryReport rep = assert_trajectory(r.records, p);
    for (const auto& c : rep.checks) {
      ok = ok && c.passed;
      if (c.name == "maximum_principle") over = std::max(over, c.worst / (p.upper - p.lower));
      if (c.name == "l4_nonincreasing") l4 = std::max(l4, c.worst);
    }
  }
  return {ok, "worst excursion " + sci(over) + " of the range (tol 1e-4); worst L4 rise beyond 1e-6/time " +
                  sci(l4) + " relative"};
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
    auto hom = [&](std::size_t j, double z, double out[4]) {
      const double t = kappa * (z - 0.5 * (s.top(j) + s.bottom(j)));
      const double a = s.layer(j).K / mu;
      out[0] = std::cosh(t);
      out[1] = std::sinh(t);
      out[2] = a * kappa * std::sinh(t);
      out[3] = a * kappa * std::cosh(t);
    };
    double h[4], hb[4];
    std::size_t row = 0;
    hom(0, 0.0, h);
    M(row, 0) = h[2];
    M(row, 1) = h[3];
    r(row++) = -part_flux(0, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      const double z = s.interface(j);
      hom(j - 1, z, h);
      hom(j, z, hb);
      for (int p = 0; p < 2; ++p) {
        M(row, 2 * (j - 1)) = h[2 * p];
        M(row, 2 * (j - 1) + 1) = h[2 * p + 1];
        M(row, 2 * j) = -hb[2 * p];
        M(row, 2 * j + 1) = -hb[2 * p + 1];
        r(row++) = p == 0 ? part_value(j, z) - part_value(j - 1, z) : part_flux(j, z) - part_flux(j - 1, z);
      }
    }
    hom(n - 1, -s.depth(), h);
    M(row, 2 * (n - 1)) = h[2];
    M(row, 2 * (n - 1) + 1) = h[3];
    r(row) = -part_flux(n - 1, -s.depth());
    const Eigen::VectorXd x = M.fullPivLu().solve(r);
    for (std::size_t j = 0; j < n; ++j) {
      A.push_back(x(2 * j));
      B.push_back(x(2 * j + 1));
    }
  }
  double part_value(std::size_t j, double z) const { return c * s.layer(j).bD() / lam * v.derivative_in_layer(j, z); }
  double part_flux(std::size_t j, double z) const {
    return s.layer(j).K / mu * c * s.layer(j).bD() * kappa * kappa / lam * v.value_in_layer(j, z);
  }
  double value(std::size_t j, double z) const {
    const double t = kappa * (z - 0.5 * (s.top(j) + s.bottom(j)));
    return part_value(j, z) + A[j] * std::cosh(t) + B[j] * std::sinh(t);
  }
};

// 8
Outcome manufactured_pressure() {
  const LayerStack st = LayerStack::build({0.0, -0.4, -1.0}, {{1, 1, 1}, {4, 1, 10}}, 2.0);
  const Grid g(st, 8, 48);
  const SpectralSpace sp(g, 6, BasisWeight::unit);
  const PhysicalConstants k = buoyant(1.5);
  const std::size_t m = 1, kk = 2;
  const ExactPressure exact(st, sp.basis(m), kk, k.buoyancy(), k.mu);
  auto f = sp.zeros();
  f.c(m, kk) = 1.0;
  f.nodal_valid = false;

  std::vector<double> perr, uz_jump;
  double p_jump = 0.0;
  auto level = [&](ElementSpec spec) {
    const DarcyModel model(sp, k, BoundaryData{}, spec);
    const FlowState s = model.make_state(f);
    double e = 0.0;
    for (std::size_t j = 0; j < st.layer_count(); ++j) {
      for (int i = 0; i <= 40; ++i) {
        const double z = st.bottom(j) + st.thickness(j) * i / 40.0;
        e = std::max(e, std::abs(model.pressure_solver(m).value(s.pressure.re[m], j, z) - exact.value(j, z)));
      }
    }
    const DiagnosticsRecord r = measure(s, model);
    if (spec.order == 3) p_jump = std::max(p_jump, r.interfaces[0].P);
    return std::pair{e, r.interfaces[0].uz};
  };
  for (int n : {4, 8, 16, 32}) {
    const auto [e, j] = level(ElementSpec{3, n});
    perr.push_back(e);
    uz_jump.push_back(j);
  }
  double po = 1e300, uo = 1e300;
  for (std::size_t i = 1; i < perr.size(); ++i) {
    po = std::min(po, std::log2(perr[i - 1] / perr[i]));
    uo = std::min(uo, std::log2(uz_jump[i - 1] / uz_jump[i]));
  }
  // quadratic elements, reported only
  std::string quad;
  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    const double j = level(ElementSpec{2, n}).second;
    if (prev > 0.0) quad += (quad.empty() ? "" : ", ") + sci(std::log2(prev / j));
    prev = j;
  }
  const bool ok = po >= 2.0 && uo >= 2.0 && p_jump <= 1e-8;
  return {ok, "pressure order " + sci(po) + ", u_z jump order " + sci(uo) + " (want >= 2, cubic elements); P jump " +
                  sci(p_jump) + " (continuous elements, tol 1e-8); quadratic u_z jump orders " + quad};
}

// 9
Outcome conduction() {
  const LayerStack st = LayerStack::build({0.0, -0.5, -1.0}, {{1, 1, 1}, {1, 1, 2}}, 1.0);
  const ConductionLift lift(st, BoundaryData{0.0, 1.0});
  const double ev = std::abs(lift.value(-0.5) - 2.0 / 3.0);
  const double ef = std::abs(std::abs(lift.flux()) - 4.0 / 3.0);
  const Grid g(st, 8, 16);
  const SpectralSpace sp(g, 6, BasisWeight::unit);
  const DarcyModel model(sp, buoyant(1.0), BoundaryData{0.0, 1.0});
  const DiagnosticsRecord r = measure(model.make_state(sp.zeros()), model);
  double spread = 0.0;
  for (double f : r.flux) spread = std::max(spread, std::abs(f - lift.flux()) / std::abs(lift.flux()));
  const bool ok = ev <= 1e-10 && ef <= 1e-10 && spread <= 1e-8;
  return {ok, "interface value error " + sci(ev) + ", flux error " + sci(ef) + " (tol 1e-10); F(z) spread " +
                  sci(spread) + " relative (tol 1e-8)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 10
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("layercon_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  RunConfig c;
  c.stack.interfaces = {0.0, -0.5, -1.0};
  c.stack.layers = {{1, 1, 1}, {2, 1, 3}};
  c.constants.alpha = 10.0;
  c.boundary = {0.0, 1.0};
  c.resolution.nx = 16;
  c.resolution.kmax = 8;
  c.resolution.nq = 24;
  c.stepper.dt = 1e-3;
  c.t_end = 0.02;
  c.output.cadence = 2;
  c.output.checkpoint = true;
  c.output.checkpoint_every = 10;
  c.initial.kind = InitialKind::random;
  c.initial.seed = 7;
  c.initial.amplitude = 0.5;
  write_file(root / "run.cfg", emit_config(c));

  std::ostringstream sink;
  auto invoke = [&](const std::string& out, const std::string& resume) {
    CommandOptions o;
    o.config = (root / "run.cfg").string();
    o.out = (root / out).string();
    o.resume = resume;
    o.quiet = true;
    return run_command("run", o, sink, sink);
  };
  // both runs write to the same directory, so the echoed config matches too
  auto capture = [&]() {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(root / "a")) files[e.path().filename().string()] = slurp(e.path());
    return files;
  };
  std::string detail;
  bool ok = invoke("a", "") == exit_ok;
  const auto first = ok ? capture() : std::map<std::string, std::string>{};
  fs::remove_all(root / "a");
  ok = ok && invoke("a", "") == exit_ok;
  const auto second = ok ? capture() : std::map<std::string, std::string>{};
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) detail += " differs: " + name;
  }
  ok = ok && detail.empty() && first.size() == second.size();
  const std::size_t files = first.size();
  const fs::path mid = root / "a" / "checkpoint_00000010.chk";
  bool restart = ok && fs::exists(mid) && invoke("c", mid.string()) == exit_ok;
  if (restart) {
    const fs::path fin = "checkpoint_00000020.chk";
    restart = slurp(root / "a" / fin) == slurp(root / "c" / fin);
  }
  ok = ok && restart;
  fs::remove_all(root);
  if (!sink.str().empty() && !ok) detail += " log: " + sink.str();
  return {ok, std::to_string(files) + " output files byte-identical across two runs; restart from step 10 " +
                  (restart ? "reproduces" : "does not reproduce") + " the final checkpoint" + detail};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::function<void(const CriterionResult&)>& on_result) {
  struct Entry {
    const char* name;
    Outcome (*fn)();
    double budget;
  };
  const Entry entries[] = {
      {"analytic spectrum", analytic_spectrum, 1.0},
      {"oracle equivalence", oracle_equivalence, 30.0},
      {"orthonormality and transmission", orthonormality_transmission, 0.0},
      {"hydrostatic null test", hydrostatic, 5.0},
      {"exact decay trajectory", exact_decay, 60.0},
      {"energy law residual order", energy_law, 0.0},
      {"maximum principle and L4 monotonicity", maximum_principle, 0.0},
      {"manufactured pressure", manufactured_pressure, 0.0},
      {"conduction steady state", conduction, 0.0},
      {"determinism and restart", determinism, 0.0},
  };
  std::vector<CriterionResult> out;
  int id = 0;
  for (const auto& e : entries) {
    CriterionResult r;
    r.id = ++id;
    r.name = e.name;
    r.budget = e.budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = e.fn();
      r.passed = o.passed;
      r.measured = o.measured;
    } catch (const std::exception& ex) {
      r.passed = false;
      r.measured = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget > 0.0 && r.seconds >= r.budget) {
      r.passed = false;
      r.measured += "; over the runtime budget";
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof(head), "%s %2d %s: ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str());
  std::string s = head + r.measured + " [" + sci(r.seconds) + " s";
  if (r.budget > 0.0) s += ", budget " + sci(r.budget) + " s";
  return s + "]";
}

}  // namespace layercon

#include "layercon/darcy_transport.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "layercon/parallel.hpp"
#include "layercon/text.hpp"

namespace layercon {

const char* scheme_name(Scheme s) { return s == Scheme::imex_euler ? "imex-euler" : "imex-cn"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "imex-euler") return Scheme::imex_euler;
  if (name == "imex-cn") return Scheme::imex_cn;
  throw ConfigError("unknown scheme '" + name + "' (imex-euler or imex-cn)");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("stepper: dt must be positive");
  if (!(cfl_target > 0.0 && cfl_target <= 1.0)) throw ConfigError("stepper: cfl must lie in (0, 1]");
}

DarcyModel::DarcyModel(const SpectralSpace& space, PhysicalConstants constants,
                       BoundaryData boundary, ElementSpec elements)
    : space_(space), constants_(constants), boundary_(boundary), elements_(elements) {
  constants_.validate();
  boundary_.validate();
  const LayerStack& st = stack();
  const Grid& grid = space_.grid();
  if (space_.weight() == BasisWeight::unit) {
    if (!st.uniform_porosity()) {
      throw ConfigError("layered porosity needs the porosity-weighted basis");
    }
    beta_ = st.layer(0).b;
  }
  lift_ = conduction_profile(st, boundary_);

  const std::size_t n = st.layer_count();
  darcy_coeff_.resize(n);
  for (std::size_t j = 0; j < n; ++j) darcy_coeff_[j] = st.layer(j).K / constants_.mu;

  const std::size_t M = space_.modes();
  solvers_.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    solvers_.emplace_back(st, darcy_coeff_, grid.kappa(m), EndCondition::neumann, elements_);
  }
  const auto& qz = solvers_[0].quadrature_points();
  const auto& ql = solvers_[0].quadrature_layers();
  quad_traces_.resize(M);
  parallel_for(M, [&](std::size_t m) { quad_traces_[m] = space_.basis(m).traces(qz, ql); });
  quad_lift_.resize(qz.size());
  for (std::size_t g = 0; g < qz.size(); ++g) quad_lift_[g] = lift_.value_in_layer(ql[g], qz[g]);

  // every mode shares the mesh, so one sampler serves all of them
  grid_sampler_ = solvers_[0].sampler(grid.z(), grid.node_layers());
  const std::size_t nz = grid.nz();
  node_coeff_.resize(nz);
  node_lift_slope_.resize(nz);
  for (std::size_t q = 0; q < nz; ++q) {
    node_coeff_[q] = darcy_coeff_[grid.node_layers()[q]];
    node_lift_slope_[q] = lift_.slope(grid.node_layers()[q]);
  }

  const std::size_t K = space_.kmax();
  test_norm_.assign(M * K, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    const double k2 = grid.kappa(m) * grid.kappa(m);
    const Traces& t = space_.traces(m);
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < nz; ++q) {
        s += grid.weights()[q] * (t.derivative(q, k) * t.derivative(q, k) + k2 * t.value(q, k) * t.value(q, k));
      }
      test_norm_[m * K + k] = std::sqrt(grid.width() * s);
    }
  }
}

DarcyModel::~DarcyModel() = default;

PressureField DarcyModel::solve_pressure(const SpectralField& phi_hom) const {
  if (!phi_hom.modal_valid) throw std::invalid_argument("solve_pressure: modal coefficients not valid");
  const std::size_t M = space_.modes();
  const std::size_t K = space_.kmax();
  const double c = constants_.buoyancy();
  const auto& ql = solvers_[0].quadrature_layers();
  const std::size_t ng = ql.size();
  PressureField out;
  out.re.resize(M);
  out.im.resize(M);
  parallel_for(M, [&](std::size_t m) {
    const Traces& t = quad_traces_[m];
    std::vector<double> fr(ng), fi(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      double pr = m == 0 ? quad_lift_[g] : 0.0, pi = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const cplx a = phi_hom.c(m, k);
        const double v = t.value(g, k);
        pr += a.real() * v;
        pi += a.imag() * v;
      }
      const double s = -c * darcy_coeff_[ql[g]];
      fr[g] = s * pr;
      fi[g] = s * pi;
    }
    out.re[m] = solvers_[m].solve({}, fr);
    out.im[m] = m == 0 ? std::vector<double>(out.re[m].size(), 0.0) : solvers_[m].solve({}, fi);
  });
  return out;
}

void DarcyModel::pressure_rows(const PressureField& pressure, ModeRows& values, ModeRows& dz) const {
  const std::size_t M = space_.modes();
  const std::size_t nz = space_.grid().nz();
  values.resize(M, nz);
  dz.resize(M, nz);
  parallel_for(M, [&](std::size_t m) {
    const std::size_t o = m * nz;
    grid_sampler_.apply(pressure.re[m], std::span<double>(values.re.data() + o, nz),
                        std::span<double>(dz.re.data() + o, nz));
    grid_sampler_.apply(pressure.im[m], std::span<double>(values.im.data() + o, nz),
                        std::span<double>(dz.im.data() + o, nz));
  });
}

std::vector<double> DarcyModel::pressure_nodal(const PressureField& pressure) const {
  ModeRows p, pz;
  pressure_rows(pressure, p, pz);
  std::vector<double> out;
  space_.inverse_rows(p, out);
  return out;
}

void DarcyModel::darcy_velocity(const SpectralField& phi_hom, const PressureField& pressure,
                                std::vector<double>& ux, std::vector<double>& uz) const {
  const std::size_t M = space_.modes();
  const std::size_t nz = space_.grid().nz();
  const double c = constants_.buoyancy();
  ModeRows p, pz, phi;
  pressure_rows(pressure, p, pz);
  space_.synthesize_rows(phi_hom.modal, false, phi);
  ModeRows rx, rz;
  rx.resize(M, nz);
  rz.resize(M, nz);
  for (std::size_t m = 1; m < M; ++m) {
    const double kap = space_.grid().kappa(m);
    for (std::size_t q = 0; q < nz; ++q) {
      const std::size_t i = m * nz + q;
      const double a = node_coeff_[q];
      rx.re[i] = a * kap * p.im[i];
      rx.im[i] = -a * kap * p.re[i];
      rz.re[i] = -a * (pz.re[i] + c * phi.re[i]);
      rz.im[i] = -a * (pz.im[i] + c * phi.im[i]);
    }
  }
  space_.inverse_rows(rx, ux);
  space_.inverse_rows(rz, uz);
}

namespace {

void truncate_modes(std::vector<cplx>& modal, std::size_t K, std::size_t first_dropped) {
  for (std::size_t i = first_dropped * K; i < modal.size(); ++i) modal[i] = {};
}

}  // namespace

std::vector<cplx> DarcyModel::advection_term(const SpectralField& phi_hom,
                                             const std::vector<double>& ux,
                                             const std::vector<double>& uz) const {
  if (!phi_hom.nodal_valid || !phi_hom.modal_valid) {
    throw std::invalid_argument("advection_term: field needs both representations");
  }
  const std::size_t n = phi_hom.nodal.size();
  std::vector<double> fx, fz;
  space_.gradient_nodal(phi_hom, fx, fz);
  std::vector<double> conv(n), flux_x(n), flux_z(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = phi_hom.nodal[i];
    conv[i] = ux[i] * fx[i] + uz[i] * fz[i];
    flux_x[i] = ux[i] * f;
    flux_z[i] = uz[i] * f;
  }
  ModeRows rows;
  std::vector<cplx> a, bx, bz;
  space_.forward_rows(conv, rows);
  space_.project_rows(rows, false, false, a);
  space_.forward_rows(flux_x, rows);
  space_.project_rows(rows, false, false, bx);
  space_.forward_rows(flux_z, rows);
  space_.project_rows(rows, false, true, bz);

  // integral div(u f) v = i kappa (u_x f)_m . v - (u_z f)_m . v'   (v = 0 at the ends)
  const std::size_t K = space_.kmax();
  std::vector<cplx> out(a.size());
  for (std::size_t m = 0; m < space_.modes(); ++m) {
    const cplx ik(0.0, space_.grid().kappa(m));
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t i = m * K + k;
      out[i] = 0.5 * (a[i] + ik * bx[i] - bz[i]);
    }
  }
  truncate_modes(out, K, space_.grid().dealias_limit() + 1);
  return out;
}

std::vector<cplx> DarcyModel::lift_source(const std::vector<double>& uz) const {
  const std::size_t nx = static_cast<std::size_t>(space_.grid().nx());
  const std::size_t nz = space_.grid().nz();
  std::vector<double> s(nx * nz);
  for (std::size_t q = 0; q < nz; ++q) {
    for (std::size_t i = 0; i < nx; ++i) s[q * nx + i] = uz[q * nx + i] * node_lift_slope_[q];
  }
  ModeRows rows;
  std::vector<cplx> out;
  space_.forward_rows(s, rows);
  space_.project_rows(rows, false, false, out);
  truncate_modes(out, space_.kmax(), space_.grid().dealias_limit() + 1);
  return out;
}

FlowState DarcyModel::make_state(SpectralField phi_hom, double t, long step) const {
  FlowState s;
  if (!phi_hom.modal_valid) space_.to_modal(phi_hom);
  phi_hom.nodal_valid = false;
  space_.dealias(phi_hom);
  space_.to_nodal(phi_hom);
  s.phi_hom = std::move(phi_hom);
  s.pressure = solve_pressure(s.phi_hom);
  darcy_velocity(s.phi_hom, s.pressure, s.ux, s.uz);
  s.t = t;
  s.step = step;
  return s;
}

std::vector<cplx> DarcyModel::forcing(const FlowState& state) const {
  std::vector<cplx> f = advection_term(state.phi_hom, state.ux, state.uz);
  if (!lift_.is_zero()) {
    const std::vector<cplx> s = lift_source(state.uz);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += s[i];
  }
  return f;
}

double DarcyModel::advective_rate(const FlowState& state) const {
  double mx = 0.0, mz = 0.0;
  for (double v : state.ux) mx = std::max(mx, std::abs(v));
  for (double v : state.uz) mz = std::max(mz, std::abs(v));
  return std::max(mx / space_.grid().dx(), mz / space_.grid().min_dz());
}

FlowState DarcyModel::step(const FlowState& state, const StepperConfig& config) const {
  config.validate();
  const double rate = advective_rate(state);
  double dt = config.dt;
  if (config.adaptive && rate > 0.0) dt = std::min(dt, config.cfl_target / rate);

  const std::size_t M = space_.modes();
  const std::size_t K = space_.kmax();
  const std::vector<cplx>& c0 = state.phi_hom.modal;
  const std::vector<cplx> f0 = forcing(state);
  std::vector<cplx> c1(c0.size());

  if (config.scheme == Scheme::imex_euler) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t i = m * K + k;
        const double lam = space_.basis(m).eigenvalue(k);
        c1[i] = (c0[i] - (dt / beta_) * f0[i]) / (1.0 + dt * lam / beta_);
      }
    }
  } else {
    // Crank-Nicolson diffusion with a Heun predictor-corrector for the
    // explicit terms
    std::vector<cplx> pred(c0.size());
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t i = m * K + k;
        const double h = 0.5 * dt * space_.basis(m).eigenvalue(k) / beta_;
        pred[i] = ((1.0 - h) * c0[i] - (dt / beta_) * f0[i]) / (1.0 + h);
      }
    }
    const FlowState mid = make_state(space_.from_modal(std::move(pred)));
    const std::vector<cplx> f1 = forcing(mid);
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t i = m * K + k;
        const double h = 0.5 * dt * space_.basis(m).eigenvalue(k) / beta_;
        c1[i] = ((1.0 - h) * c0[i] - (0.5 * dt / beta_) * (f0[i] + f1[i])) / (1.0 + h);
      }
    }
  }

  for (const cplx& v : c1) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "non-finite coefficients at step %ld (t = %.17g)",
                    state.step + 1, state.t + dt);
      throw NumericalError(msg, std::make_shared<FlowState>(state));
    }
  }
  FlowState out = make_state(space_.from_modal(std::move(c1)), state.t + dt, state.step + 1);
  out.dt = dt;
  out.cfl = rate * dt;
  out.cfl_exceeded = !config.adaptive && out.cfl > config.cfl_target;
  return out;
}

EnergyTerms DarcyModel::energy_terms(const FlowState& state) const {
  const std::size_t M = space_.modes();
  const std::size_t K = space_.kmax();
  const double L = space_.grid().width();
  std::vector<cplx> s;
  if (!lift_.is_zero()) s = lift_source(state.uz);
  EnergyTerms e;
  for (std::size_t m = 0; m < M; ++m) {
    const double w = m == 0 ? 1.0 : 2.0;
    double en = 0.0, di = 0.0, wk = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const cplx c = state.phi_hom.c(m, k);
      en += std::norm(c);
      di += space_.basis(m).eigenvalue(k) * std::norm(c);
      if (!s.empty()) wk += (std::conj(c) * s[m * K + k]).real();
    }
    e.energy += w * en;
    e.dissipation += w * di;
    e.source_work += w * wk;
  }
  e.energy *= beta_ * L;
  e.dissipation *= L;
  e.source_work *= L;
  return e;
}

std::vector<double> DarcyModel::total_phi_nodal(const FlowState& state) const {
  std::vector<double> out = state.phi_hom.nodal;
  const std::size_t nx = static_cast<std::size_t>(space_.grid().nx());
  const auto& z = space_.grid().z();
  const auto& layers = space_.grid().node_layers();
  for (std::size_t q = 0; q < z.size(); ++q) {
    const double l = lift_.value_in_layer(layers[q], z[q]);
    for (std::size_t i = 0; i < nx; ++i) out[q * nx + i] += l;
  }
  return out;
}

double DarcyModel::div_defect(const FlowState& state) const {
  ModeRows rows;
  std::vector<cplx> px, pz;
  space_.forward_rows(state.ux, rows);
  space_.project_rows(rows, false, false, px);
  space_.forward_rows(state.uz, rows);
  space_.project_rows(rows, false, true, pz);
  const std::size_t K = space_.kmax();
  const double L = space_.grid().width();
  double worst = 0.0;
  for (std::size_t m = 0; m < space_.modes(); ++m) {
    const cplx ik(0.0, space_.grid().kappa(m));
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t i = m * K + k;
      worst = std::max(worst, L * std::abs(pz[i] - ik * px[i]) / test_norm_[i]);
    }
  }
  return worst;
}

void DarcyModel::mode_values_at(const FlowState& state, std::size_t j, double z,
                                std::vector<cplx>& phi, std::vector<cplx>& dphi,
                                std::vector<cplx>& uz) const {
  const std::size_t M = space_.modes();
  const std::size_t K = space_.kmax();
  const double c = constants_.buoyancy();
  const double a = darcy_coeff_[j];
  phi.assign(M, cplx{});
  dphi.assign(M, cplx{});
  uz.assign(M, cplx{});
  for (std::size_t m = 0; m < M; ++m) {
    const VerticalBasis& b = space_.basis(m);
    cplx v{}, d{};
    for (std::size_t k = 0; k < K; ++k) {
      const cplx ck = state.phi_hom.c(m, k);
      if (ck == cplx{}) continue;
      v += ck * b.function(k).value_in_layer(j, z);
      d += ck * b.function(k).derivative_in_layer(j, z);
    }
    if (m == 0) {
      v += lift_.value_in_layer(j, z);
      d += lift_.slope(j);
    }
    phi[m] = v;
    dphi[m] = d;
    if (m > 0) {
      const cplx pz(solvers_[m].derivative(state.pressure.re[m], j, z),
                    solvers_[m].derivative(state.pressure.im[m], j, z));
      uz[m] = -a * (pz + c * v);
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kCheckpointVersion = 1;

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw ConfigError("checkpoint: truncated data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const FlowState& state,
                      const DarcyModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  const SpectralSpace& sp = model.space();
  os << "version: " << kCheckpointVersion << '\n'
     << "time: " << format_double(state.t) << '\n'
     << "step: " << state.step << '\n'
     << "dt: " << format_double(state.dt) << '\n'
     << "cfl: " << format_double(state.cfl) << '\n'
     << "cfl_exceeded: " << (state.cfl_exceeded ? 1 : 0) << '\n'
     << "Nx: " << sp.grid().nx() << '\n'
     << "Kmax: " << sp.kmax() << '\n'
     << "stack_hash: " << model.stack().hash() << '\n'
     << "end_header\n";
  for (const cplx& c : state.phi_hom.modal) {
    put_f64(os, c.real());
    put_f64(os, c.imag());
  }
  if (!os) throw std::runtime_error("failed writing checkpoint " + path.string());
}

FlowState read_checkpoint(const std::filesystem::path& path, const DarcyModel& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path.string());
  std::map<std::string, std::string> head;
  std::string line;
  bool ended = false;
  while (std::getline(is, line)) {
    if (line == "end_header") {
      ended = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ConfigError("checkpoint: bad header line '" + line + "'");
    head[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
  }
  if (!ended) throw ConfigError("checkpoint: missing end_header");
  auto field = [&](const char* key) {
    auto it = head.find(key);
    if (it == head.end()) throw ConfigError(std::string("checkpoint: missing '") + key + "'");
    return it->second;
  };
  const SpectralSpace& sp = model.space();
  if (parse_long(field("version")) != kCheckpointVersion) throw ConfigError("checkpoint: unsupported version");
  if (parse_long(field("Nx")) != sp.grid().nx() ||
      parse_long(field("Kmax")) != static_cast<long>(sp.kmax())) {
    throw ConfigError("checkpoint: resolution does not match the configuration");
  }
  if (field("stack_hash") != std::to_string(model.stack().hash())) {
    throw ConfigError("checkpoint: layer stack does not match the configuration");
  }
  std::vector<cplx> modal(sp.modes() * sp.kmax());
  for (cplx& c : modal) {
    const double re = get_f64(is);
    const double im = get_f64(is);
    c = {re, im};
  }
  FlowState s = model.make_state(sp.from_modal(std::move(modal)), parse_double(field("time")),
                                 parse_long(field("step")));
  s.dt = parse_double(field("dt"));
  s.cfl = parse_double(field("cfl"));
  s.cfl_exceeded = parse_long(field("cfl_exceeded")) != 0;
  return s;
}

}  // namespace layercon

#include "layercon/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "layercon/text.hpp"

namespace layercon {

std::vector<double> flux_sample_heights(const LayerStack& stack) {
  std::vector<double> z;
  const double H = stack.depth();
  for (int s = 0; s < 32; ++s) z.push_back(-H * (s + 0.5) / 32.0);
  for (std::size_t j = 1; j < stack.layer_count(); ++j) z.push_back(stack.interface(j));
  return z;
}

double one_sided_limit(const Grid& grid, const std::vector<double>& nodal, std::size_t column,
                       std::size_t interface, bool from_above) {
  const double at = grid.stack().interface(interface);
  // nodes ascend in z: the layer above starts right after the interface
  const std::size_t first_above = grid.layer_begin(interface - 1);
  const std::size_t nx = static_cast<std::size_t>(grid.nx());
  double z[4], f[4];
  for (std::size_t a = 0; a < 4; ++a) {
    const std::size_t q = from_above ? first_above + a : first_above - 1 - a;
    z[a] = grid.z()[q];
    f[a] = nodal[q * nx + column];
  }
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) l *= (at - z[b]) / (z[a] - z[b]);
    s += l * f[a];
  }
  return s;
}

namespace {

double max_jump(const Grid& grid, const std::vector<double>& nodal, std::size_t j) {
  double worst = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(grid.nx()); ++i) {
    const double d = one_sided_limit(grid, nodal, i, j, true) - one_sided_limit(grid, nodal, i, j, false);
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace

DiagnosticsRecord measure(const FlowState& state, const DarcyModel& model) {
  const SpectralSpace& sp = model.space();
  const Grid& grid = sp.grid();
  const LayerStack& stack = model.stack();
  DiagnosticsRecord r;
  r.t = state.t;
  r.step = state.step;
  r.cfl = state.cfl;
  r.cfl_exceeded = state.cfl_exceeded;

  const EnergyTerms e = model.energy_terms(state);
  r.E = e.energy;
  r.dissipation = e.dissipation;

  const Norms n = sp.norms(state.phi_hom);
  r.L2 = n.L2;
  r.V = n.V;
  r.L4 = n.L4;
  r.Linf = n.Linf;
  r.Wnorm = n.W;
  r.Lnorm = sp.operator_norm(state.phi_hom);
  r.W_over_L = r.Lnorm > 0.0 ? r.Wnorm / r.Lnorm : 0.0;
  r.div_defect = model.div_defect(state);

  const std::vector<double> phi = model.total_phi_nodal(state);
  const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  r.min_phi = *lo;
  r.max_phi = *hi;

  if (stack.layer_count() > 1) {
    std::vector<double> fx, fz;
    sp.gradient_nodal(state.phi_hom, fx, fz);
    const std::size_t nx = static_cast<std::size_t>(grid.nx());
    for (std::size_t q = 0; q < grid.nz(); ++q) {
      const std::size_t j = grid.node_layers()[q];
      const double p = stack.layer(j).bD();
      const double slope = model.lift().slope(j);
      for (std::size_t i = 0; i < nx; ++i) fz[q * nx + i] = p * (fz[q * nx + i] + slope);
    }
    const std::vector<double> P = model.pressure_nodal(state.pressure);
    for (std::size_t j = 1; j < stack.layer_count(); ++j) {
      r.interfaces.push_back(
          {max_jump(grid, phi, j), max_jump(grid, fz, j), max_jump(grid, state.uz, j), max_jump(grid, P, j)});
    }
  }

  std::vector<cplx> pm, dm, um;
  for (double z : flux_sample_heights(stack)) {
    const std::size_t j = stack.layer_index_at(z);
    model.mode_values_at(state, j, z, pm, dm, um);
    double adv = 0.0;
    for (std::size_t m = 0; m < pm.size(); ++m) {
      adv += (m == 0 ? 1.0 : 2.0) * (um[m] * std::conj(pm[m])).real();
    }
    r.flux.push_back(adv - stack.layer(j).bD() * dm[0].real());
  }
  return r;
}

double energy_residual(const EnergyTerms& before, const EnergyTerms& after, double dt) {
  return (after.energy - before.energy) / dt + (before.dissipation + after.dissipation) +
         (before.source_work + after.source_work);
}

std::string csv_header(const LayerStack& stack) {
  std::string h =
      "t,E,dissipation,energy_residual,L2,V,L4,Linf,min_phi,max_phi,Wnorm,Lnorm,W_over_L,div_defect,cfl";
  for (std::size_t j = 1; j < stack.layer_count(); ++j) {
    const std::string p = ",iface_" + std::to_string(j) + "_";
    h += p + "phi" + p + "flux" + p + "uz" + p + "P";
  }
  const std::size_t ns = flux_sample_heights(stack).size();
  for (std::size_t s = 0; s < ns; ++s) h += ",flux_z_" + std::to_string(s);
  return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::vector<double> v = {r.t,    r.E,       r.dissipation, r.energy_residual, r.L2,
                           r.V,    r.L4,      r.Linf,        r.min_phi,         r.max_phi,
                           r.Wnorm, r.Lnorm,  r.W_over_L,    r.div_defect,      r.cfl};
  for (const auto& f : r.interfaces) v.insert(v.end(), {f.phi, f.flux, f.uz, f.P});
  v.insert(v.end(), r.flux.begin(), r.flux.end());
  return join_doubles(v, ",");
}

TrajectoryPolicy default_policy(const DiagnosticsRecord& initial, const BoundaryData& boundary) {
  TrajectoryPolicy p;
  p.lower = std::min({initial.min_phi, boundary.C0, boundary.C1});
  p.upper = std::max({initial.max_phi, boundary.C0, boundary.C1});
  p.check_energy = boundary.homogeneous();
  p.check_l4 = boundary.homogeneous();
  return p;
}

bool TrajectoryReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string TrajectoryReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"worst", c.worst},
                           {"worst_time", c.worst_time},
                           {"detail", c.detail}});
  }
  return j.dump(2);
}

namespace {

bool record_finite(const DiagnosticsRecord& r) {
  std::vector<double> v = {r.t,  r.E,       r.dissipation, r.energy_residual, r.L2,      r.V,
                           r.L4, r.Linf,    r.min_phi,     r.max_phi,         r.Wnorm,   r.Lnorm,
                           r.W_over_L,      r.div_defect,  r.cfl};
  for (const auto& f : r.interfaces) v.insert(v.end(), {f.phi, f.flux, f.uz, f.P});
  v.insert(v.end(), r.flux.begin(), r.flux.end());
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrajectoryReport assert_trajectory(const std::vector<DiagnosticsRecord>& records,
                                   const TrajectoryPolicy& policy) {
  if (records.size() < 2) throw std::invalid_argument("assert_trajectory: need at least two records");
  TrajectoryReport rep;
  const DiagnosticsRecord& first = records.front();

  CheckResult fin{"finite", true, 0.0, 0.0, "all record entries finite"};
  for (const auto& r : records) {
    if (!record_finite(r) || r.E < 0.0 || r.dissipation < 0.0 || r.L4 < 0.0 || r.Linf < 0.0) {
      fin.passed = false;
      fin.worst_time = r.t;
      fin.detail = "non-finite or negative entry";
      break;
    }
  }
  rep.checks.push_back(fin);

  if (policy.check_energy) {
    CheckResult c{"energy_nonincreasing", true, 0.0, first.t, ""};
    const double scale = std::max(first.E, std::numeric_limits<double>::min());
    for (std::size_t i = 1; i < records.size(); ++i) {
      const double rise = (records[i].E - records[i - 1].E) / scale;
      if (rise > c.worst || i == 1) {
        c.worst = rise;
        c.worst_time = records[i].t;
      }
    }
    c.passed = c.worst <= policy.energy_slack;
    c.detail = "largest step-to-step rise of E relative to E(0)";
    rep.checks.push_back(c);
  }

  if (policy.check_l4) {
    CheckResult c{"l4_nonincreasing", true, 0.0, first.t, ""};
    const double scale = first.L4;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const double dt = records[i].t - records[i - 1].t;
      const double excess = records[i].L4 - records[i - 1].L4 - policy.l4_rate * scale * dt;
      const double rel = scale > 0.0 ? excess / scale : excess;
      if (rel > c.worst || i == 1) {
        c.worst = rel;
        c.worst_time = records[i].t;
      }
    }
    // roundoff floor on top of the allowed rate
    c.passed = c.worst <= 1e-13;
    c.detail = "largest L4 rise beyond the allowed rate, relative to L4(0)";
    rep.checks.push_back(c);
  }

  if (policy.check_extrema) {
    CheckResult c{"maximum_principle", true, 0.0, first.t, ""};
    const double range = policy.upper - policy.lower;
    const double eps = policy.extrema_margin * (range > 0.0 ? range : 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
      const double over = std::max(policy.lower - r.min_phi, r.max_phi - policy.upper);
      if (over > worst) {
        worst = over;
        c.worst_time = r.t;
      }
    }
    c.worst = worst;
    c.passed = worst <= eps;
    c.detail = "largest excursion outside [lower, upper]; allowed " + format_double(eps);
    rep.checks.push_back(c);
  }

  if (policy.check_ratio_band) {
    CheckResult c{"w_over_l_band", true, 0.0, first.t, ""};
    const double t0 = first.t + policy.transient_fraction * (records.back().t - first.t);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : records) {
      if (r.t < t0 || r.Lnorm <= 0.0) continue;
      if (r.W_over_L > hi) {
        hi = r.W_over_L;
        c.worst_time = r.t;
      }
      lo = std::min(lo, r.W_over_L);
    }
    c.worst = hi > 0.0 ? hi / lo : 1.0;
    c.passed = c.worst < policy.ratio_band;
    c.detail = "max/min of W/L after the transient";
    rep.checks.push_back(c);
  }
  return rep;
}

double fit_decay_rate(const std::vector<DiagnosticsRecord>& records) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  double n = 0.0;
  for (const auto& r : records) {
    if (!(r.E > 0.0)) continue;
    const double y = std::log(r.E);
    st += r.t;
    sy += y;
    stt += r.t * r.t;
    sty += r.t * y;
    n += 1.0;
  }
  if (n < 2.0) throw std::invalid_argument("fit_decay_rate: need two records with E > 0");
  return -(n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace layercon

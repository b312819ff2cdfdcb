#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "layercon/darcy_transport.hpp"

namespace layercon {

/// Jumps (above minus below, max over x) across one internal interface.
struct InterfaceResidual {
  double phi = 0.0;
  double flux = 0.0;  // bD dphi/dz
  double uz = 0.0;
  double P = 0.0;

  bool operator==(const InterfaceResidual&) const = default;
};

/// Norms refer to phi_hom; min_phi / max_phi to the total concentration.
struct DiagnosticsRecord {
  double t = 0.0;
  long step = 0;
  double E = 0.0;            // integral b phi_hom^2
  double dissipation = 0.0;  // integral bD |grad phi_hom|^2
  double energy_residual = 0.0;
  double L2 = 0.0, V = 0.0, L4 = 0.0, Linf = 0.0;
  double min_phi = 0.0, max_phi = 0.0;
  double Wnorm = 0.0, Lnorm = 0.0, W_over_L = 0.0;
  double div_defect = 0.0;
  double cfl = 0.0;
  bool cfl_exceeded = false;
  std::vector<InterfaceResidual> interfaces;  // internal interfaces 1 .. layers-1
  std::vector<double> flux;                   // at flux_sample_heights()

  bool operator==(const DiagnosticsRecord&) const = default;
};

/// Heights of the vertical flux profile: 32 mid-cell samples
/// z_s = -H (s + 1/2) / 32, then the internal interfaces top to bottom.
/// Interface samples use the layer below.
std::vector<double> flux_sample_heights(const LayerStack& stack);

/// Value at interface j of a nodal column, extrapolated by the cubic through
/// the 4 Gauss nodes nearest to it on one side.
double one_sided_limit(const Grid& grid, const std::vector<double>& nodal, std::size_t column,
                       std::size_t interface, bool from_above);

/// Everything except energy_residual, which needs the previous step.
DiagnosticsRecord measure(const FlowState& state, const DarcyModel& model);

/// (E1 - E0)/dt + (D0 + D1) + (W0 + W1); zero up to time-discretization
/// error for an exact solution of the energy law.
double energy_residual(const EnergyTerms& before, const EnergyTerms& after, double dt);

std::string csv_header(const LayerStack& stack);
std::string csv_row(const DiagnosticsRecord& r);

struct TrajectoryPolicy {
  bool check_energy = true;       // needs homogeneous boundary data
  double energy_slack = 1e-12;    // relative to E(0)
  bool check_l4 = true;           // needs homogeneous boundary data
  double l4_rate = 1e-6;          // allowed increase per unit time, relative to L4(0)
  bool check_extrema = true;
  double lower = 0.0, upper = 0.0;  // bounds for the total concentration
  double extrema_margin = 1e-4;     // relative to (upper - lower)
  bool check_ratio_band = true;
  double ratio_band = 1e3;          // max/min of W/L after the transient
  double transient_fraction = 0.1;  // of the time span
};

/// Bounds for the maximum principle: extrema of the initial total
/// concentration and of the boundary data.
TrajectoryPolicy default_policy(const DiagnosticsRecord& initial, const BoundaryData& boundary);

struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;       // largest violation (or measured value)
  double worst_time = 0.0;
  std::string detail;
};

struct TrajectoryReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::string to_json() const;
};

/// Requires at least two records.
TrajectoryReport assert_trajectory(const std::vector<DiagnosticsRecord>& records,
                                   const TrajectoryPolicy& policy);

/// Least-squares slope of -log E against t.
double fit_decay_rate(const std::vector<DiagnosticsRecord>& records);

}  // namespace layercon

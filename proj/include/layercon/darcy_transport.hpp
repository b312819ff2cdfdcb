#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "layercon/layer_stack.hpp"
#include "layercon/mode_elliptic.hpp"
#include "layercon/spectral_fields.hpp"

namespace layercon {

enum class Scheme { imex_euler, imex_cn };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct StepperConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::imex_cn;
  double cfl_target = 0.5;
  bool adaptive = false;

  void validate() const;
  bool operator==(const StepperConfig&) const = default;
};

/// Pressure as finite-element coefficients, one real/imaginary pair per
/// stored horizontal mode.
struct PressureField {
  std::vector<std::vector<double>> re, im;
};

/// phi_hom carries zero Dirichlet data; the physical concentration is
/// phi_hom plus the conduction lift. Velocity is nodal on the grid.
struct FlowState {
  SpectralField phi_hom;
  PressureField pressure;
  std::vector<double> ux, uz;
  double t = 0.0;
  long step = 0;
  double dt = 0.0;  // size of the step that produced this state
  double cfl = 0.0;
  bool cfl_exceeded = false;
};

/// E = integral b phi_hom^2, D = integral bD |grad phi_hom|^2 and the work of
/// the lift source, W = integral (u_z dlift/dz) phi_hom. With the skew
/// advection form, dE/dt = -2 (D + W).
struct EnergyTerms {
  double energy = 0.0;
  double dissipation = 0.0;
  double source_work = 0.0;
};

/// Non-finite values after a step. Holds the last finite state.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::shared_ptr<const FlowState> last)
      : std::runtime_error(what), last_valid(std::move(last)) {}
  std::shared_ptr<const FlowState> last_valid;
};

/// Darcy flow driven by buoyancy plus advection-diffusion of the
/// concentration in the eigenbasis of the spectral space.
///
/// Pressure, per mode m:  integral (K/mu)(P' q' + kappa^2 P q) dz
///                          = -integral c (K/mu) phi_m q' dz,   c = alpha rho0 g,
/// with natural (no-flux) ends, then u = -(K/mu)(grad P + c phi e_z).
/// The horizontal mean of u_z vanishes identically (div u = 0 with
/// u_z = 0 at both ends), so the mode-0 velocity is set to zero.
class DarcyModel {
 public:
  /// The space must use the porosity-weighted basis unless b is uniform.
  DarcyModel(const SpectralSpace& space, PhysicalConstants constants, BoundaryData boundary,
             ElementSpec elements = {});
  ~DarcyModel();
  DarcyModel(const DarcyModel&) = delete;
  DarcyModel& operator=(const DarcyModel&) = delete;

  const SpectralSpace& space() const { return space_; }
  const LayerStack& stack() const { return space_.grid().stack(); }
  const PhysicalConstants& constants() const { return constants_; }
  const BoundaryData& boundary() const { return boundary_; }
  const ConductionLift& lift() const { return lift_; }
  const ElementSpec& elements() const { return elements_; }
  /// Mass factor of the modal equations: b for the unit basis, 1 for the
  /// porosity-weighted one.
  double beta() const { return beta_; }
  const ModeEllipticSolver& pressure_solver(std::size_t m) const { return solvers_[m]; }

  PressureField solve_pressure(const SpectralField& phi_hom) const;
  void darcy_velocity(const SpectralField& phi_hom, const PressureField& pressure,
                      std::vector<double>& ux, std::vector<double>& uz) const;
  /// Galerkin coefficients of 1/2 (u . grad f + div(u f)) for f = phi_hom,
  /// dealiased.
  std::vector<cplx> advection_term(const SpectralField& phi_hom, const std::vector<double>& ux,
                                   const std::vector<double>& uz) const;
  /// Galerkin coefficients of u_z dlift/dz, dealiased.
  std::vector<cplx> lift_source(const std::vector<double>& uz) const;

  /// Dealiases phi_hom, fills both representations and the flow.
  FlowState make_state(SpectralField phi_hom, double t = 0.0, long step = 0) const;
  FlowState step(const FlowState& state, const StepperConfig& config) const;

  /// max |u_x| / dx and max |u_z| / dz_min combined; cfl = rate * dt.
  double advective_rate(const FlowState& state) const;
  EnergyTerms energy_terms(const FlowState& state) const;

  /// Pressure and its z-derivative per mode at the grid nodes.
  void pressure_rows(const PressureField& pressure, ModeRows& values, ModeRows& dz) const;
  std::vector<double> pressure_nodal(const PressureField& pressure) const;
  /// phi_hom plus the lift at the grid nodes.
  std::vector<double> total_phi_nodal(const FlowState& state) const;

  /// Max over modes and basis functions q = e^{i kappa x} v of
  /// |integral u . grad q| / ||grad q||, by grid quadrature.
  double div_defect(const FlowState& state) const;

  /// Mode amplitudes of the total concentration, of its z-derivative and of
  /// u_z at height z, evaluated with layer j's pieces (z may be on the
  /// layer's boundary).
  void mode_values_at(const FlowState& state, std::size_t j, double z, std::vector<cplx>& phi,
                      std::vector<cplx>& dphi, std::vector<cplx>& uz) const;

 private:
  std::vector<cplx> forcing(const FlowState& state) const;

  const SpectralSpace& space_;
  PhysicalConstants constants_;
  BoundaryData boundary_;
  ConductionLift lift_;
  ElementSpec elements_;
  double beta_ = 1.0;
  std::vector<double> darcy_coeff_;       // K/mu per layer
  std::vector<ModeEllipticSolver> solvers_;
  std::vector<Traces> quad_traces_;       // basis at the elliptic quadrature points
  std::vector<double> quad_lift_;
  ModeEllipticSolver::Sampler grid_sampler_;
  std::vector<double> node_coeff_, node_lift_slope_;
  std::vector<double> test_norm_;         // ||grad(e^{i kappa x} v)|| per (m, k)
};

/// Checkpoint: text header of `key: value` lines ending with `end_header`,
/// then the modal coefficients as little-endian float64, ordered (mode,
/// eigenindex, real, imaginary).
void write_checkpoint(const std::filesystem::path& path, const FlowState& state,
                      const DarcyModel& model);
/// Rebuilds the full state (pressure and velocity included). Throws
/// ConfigError when the header does not match the model.
FlowState read_checkpoint(const std::filesystem::path& path, const DarcyModel& model);

}  // namespace layercon

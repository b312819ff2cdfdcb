#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "layercon/darcy_transport.hpp"
#include "layercon/layer_stack.hpp"
#include "layercon/spectral_fields.hpp"

namespace layercon {

enum class BasisChoice { automatic, unit, porosity };
enum class InitialKind { zero, eigenmode, random, file };

struct StackSpec {
  std::vector<double> interfaces;
  std::vector<LayerParams> layers;  // K, b, D per layer, top first
  double width = 1.0;
  bool operator==(const StackSpec&) const = default;
};

struct ResolutionSpec {
  int nx = 128;
  int kmax = 64;
  int nq = 0;  // 0: chosen automatically
  int elliptic_order = 2;
  int elements_per_layer = 32;
  BasisChoice basis = BasisChoice::automatic;
  bool operator==(const ResolutionSpec&) const = default;
};

struct OutputSpec {
  long cadence = 10;  // steps between diagnostics records
  std::string directory = "out";
  bool csv = true;
  bool vtk = false;
  bool checkpoint = false;
  long snapshot_every = 0;    // steps between VTK snapshots; 0: final only
  long checkpoint_every = 0;  // steps between checkpoints; 0: final only
  bool operator==(const OutputSpec&) const = default;
};

/// eigenmode: amplitude * Re(e^{i kappa_m x}) v_{m,k}, k counted from 1.
/// random: Gaussian coefficients scaled by amplitude / ((1+m)(1+k)) for
/// m, k-1 <= band, from a 64-bit Mersenne twister seeded with `seed`.
/// file: whitespace-separated total concentration on the grid nodes, one
/// line per vertical node (ascending z), Nx values per line.
struct InitialSpec {
  InitialKind kind = InitialKind::zero;
  int m = 0;
  int k = 1;
  double amplitude = 1.0;
  std::uint64_t seed = 1;
  int band = 4;
  std::string path;
  bool operator==(const InitialSpec&) const = default;
};

struct RunConfig {
  StackSpec stack;
  PhysicalConstants constants;
  BoundaryData boundary;
  ResolutionSpec resolution;
  StepperConfig stepper;
  double t_end = 1.0;
  OutputSpec output;
  InitialSpec initial;
  bool operator==(const RunConfig&) const = default;
};

/// Flat `section.key = value` lines; '#' starts a comment. Unknown or
/// repeated keys, missing required keys and inconsistent values throw
/// ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Every key, defaults included. parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);
void validate(const RunConfig& config);

LayerStack build_stack(const StackSpec& spec);

/// Largest deviation from the identity of the grid-quadrature Gram matrix
/// over the given bases.
double basis_gram_error(const std::vector<VerticalBasis>& bases, const LayerStack& stack, int nq,
                        BasisWeight weight);

/// Everything a subcommand needs, built from a validated configuration.
/// An automatic nq starts at max(8, 2 Kmax / layers) and grows until the
/// basis Gram error is <= 1e-12.
struct Simulation {
  RunConfig config;  // with nq resolved
  std::unique_ptr<SpectralSpace> space;
  std::unique_ptr<DarcyModel> model;
  std::vector<std::string> warnings;

  static Simulation build(const RunConfig& config);
  const LayerStack& stack() const { return space->grid().stack(); }
  FlowState initial_state() const;
};

}  // namespace layercon

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace layercon {

/// Raised for any invalid geometry, material or configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LayerParams {
  double K = 1.0;  // permeability
  double b = 1.0;  // porosity, in (0, 1]
  double D = 1.0;  // diffusivity

  double bD() const { return b * D; }
  bool operator==(const LayerParams&) const = default;
};

/// Horizontally periodic strip (0, L) x (-H, 0) cut into horizontal layers.
///
/// Layer j (0-based) occupies (interface(j+1), interface(j)); interface(0)
/// is the top z = 0 and interface(layer_count()) is the bottom z = -H.
class LayerStack {
 public:
  /// Validates and normalizes the input. Interfaces may be given as signed
  /// depths (0, -0.5, -1) or positive depths (0, 0.5, 1); they are shifted
  /// so the top is exactly 0 and must be strictly monotone.
  static LayerStack build(std::vector<double> interfaces,
                          std::vector<LayerParams> layers, double width);

  std::size_t layer_count() const { return layers_.size(); }
  double depth() const { return -interfaces_.back(); }
  double width() const { return width_; }

  double interface(std::size_t j) const { return interfaces_[j]; }
  const std::vector<double>& interfaces() const { return interfaces_; }
  double top(std::size_t j) const { return interfaces_[j]; }
  double bottom(std::size_t j) const { return interfaces_[j + 1]; }
  double thickness(std::size_t j) const { return interfaces_[j] - interfaces_[j + 1]; }

  const LayerParams& layer(std::size_t j) const { return layers_[j]; }
  const std::vector<LayerParams>& layers() const { return layers_; }

  /// Layer containing z. A point on an internal interface belongs to the
  /// layer below it. Throws ConfigError outside [-H, 0].
  std::size_t layer_index_at(double z) const;
  LayerParams material_at(double z) const { return layers_[layer_index_at(z)]; }

  bool uniform_porosity() const;

  /// Stable textual form of geometry and material, used for hashing.
  std::string canonical_text() const;
  /// FNV-1a over canonical_text().
  std::uint64_t hash() const;

  bool operator==(const LayerStack&) const = default;

 private:
  LayerStack() = default;

  std::vector<double> interfaces_;
  std::vector<LayerParams> layers_;
  double width_ = 1.0;
};

struct PhysicalConstants {
  double mu = 1.0;
  double rho0 = 1.0;
  double alpha = 1.0;
  double g = 1.0;

  /// Buoyancy factor alpha * rho0 * g.
  double buoyancy() const { return alpha * rho0 * g; }
  void validate() const;
  bool operator==(const PhysicalConstants&) const = default;
};

struct BoundaryData {
  double C0 = 0.0;  // concentration at z = 0
  double C1 = 0.0;  // concentration at z = -H

  bool homogeneous() const { return C0 == 0.0 && C1 == 0.0; }
  void validate() const;
  bool operator==(const BoundaryData&) const = default;
};

/// Steady conduction profile: piecewise linear, continuous, with the same
/// diffusive flux -bD * d/dz in every layer.
class ConductionLift {
 public:
  ConductionLift() = default;
  ConductionLift(const LayerStack& stack, const BoundaryData& bdata);

  double value(double z) const;
  double value_in_layer(std::size_t j, double z) const { return slope_[j] * z + offset_[j]; }
  double slope(std::size_t j) const { return slope_[j]; }
  double offset(std::size_t j) const { return offset_[j]; }
  /// q = -b_j D_j a_j, identical in every layer.
  double flux() const { return flux_; }
  std::size_t layer_count() const { return slope_.size(); }
  bool is_zero() const { return zero_; }

 private:
  std::vector<double> interfaces_;
  std::vector<double> slope_;
  std::vector<double> offset_;
  double flux_ = 0.0;
  bool zero_ = true;
};

inline ConductionLift conduction_profile(const LayerStack& stack, const BoundaryData& bdata) {
  return ConductionLift(stack, bdata);
}

}  // namespace layercon

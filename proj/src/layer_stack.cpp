#include "layercon/layer_stack.hpp"

#include <cmath>
#include <sstream>

#include "layercon/text.hpp"

namespace layercon {

LayerStack LayerStack::build(std::vector<double> interfaces, std::vector<LayerParams> layers,
                             double width) {
  if (layers.empty()) throw ConfigError("layer stack: empty layer list");
  if (interfaces.size() != layers.size() + 1) {
    throw ConfigError("layer stack: layer-count mismatch (" + std::to_string(interfaces.size()) +
                      " interfaces for " + std::to_string(layers.size()) + " layers)");
  }
  for (double z : interfaces) {
    if (!std::isfinite(z)) throw ConfigError("layer stack: non-finite interface");
  }
  const double z0 = interfaces.front();
  for (double& z : interfaces) z -= z0;
  // positive depths are accepted and flipped into z < 0
  if (interfaces.size() > 1 && interfaces[1] > 0.0) {
    for (double& z : interfaces) z = -z;
  }
  for (std::size_t j = 1; j < interfaces.size(); ++j) {
    if (!(interfaces[j] < interfaces[j - 1])) {
      throw ConfigError("layer stack: non-monotone interfaces at index " + std::to_string(j));
    }
  }
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const auto& p = layers[j];
    if (!(p.K > 0.0) || !std::isfinite(p.K)) {
      throw ConfigError("layer stack: non-positive permeability in layer " + std::to_string(j));
    }
    if (!(p.b > 0.0 && p.b <= 1.0)) {
      throw ConfigError("layer stack: porosity outside (0, 1] in layer " + std::to_string(j));
    }
    if (!(p.D > 0.0) || !std::isfinite(p.D)) {
      throw ConfigError("layer stack: non-positive diffusivity in layer " + std::to_string(j));
    }
  }
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ConfigError("layer stack: width must be positive");
  }
  LayerStack s;
  s.interfaces_ = std::move(interfaces);
  s.layers_ = std::move(layers);
  s.width_ = width;
  return s;
}

std::size_t LayerStack::layer_index_at(double z) const {
  if (!(z <= 0.0 && z >= interfaces_.back())) {
    throw ConfigError("material_at: z = " + format_double(z) + " outside [-H, 0]");
  }
  // interface(j) for j >= 1 is attributed to layer j (the one below it)
  for (std::size_t j = 0; j + 1 < layers_.size(); ++j) {
    if (z > interfaces_[j + 1]) return j;
  }
  return layers_.size() - 1;
}

bool LayerStack::uniform_porosity() const {
  for (const auto& p : layers_) {
    if (p.b != layers_.front().b) return false;
  }
  return true;
}

std::string LayerStack::canonical_text() const {
  std::ostringstream os;
  os << "width=" << format_double(width_) << ";z=" << join_doubles(interfaces_, ",");
  for (const auto& p : layers_) {
    os << ";K=" << format_double(p.K) << ",b=" << format_double(p.b)
       << ",D=" << format_double(p.D);
  }
  return os.str();
}

std::uint64_t LayerStack::hash() const { return fnv1a64(canonical_text()); }

void PhysicalConstants::validate() const {
  for (double v : {mu, rho0, g}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("mu, rho0 and g must be strictly positive");
    }
  }
  // alpha = 0 switches buoyancy off
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be non-negative");
}

void BoundaryData::validate() const {
  if (!std::isfinite(C0) || !std::isfinite(C1)) {
    throw ConfigError("boundary concentrations must be finite");
  }
}

ConductionLift::ConductionLift(const LayerStack& stack, const BoundaryData& bdata) {
  bdata.validate();
  const std::size_t n = stack.layer_count();
  interfaces_ = stack.interfaces();
  slope_.assign(n, 0.0);
  offset_.assign(n, 0.0);
  zero_ = bdata.homogeneous();
  if (zero_) return;

  // Series resistance: C0 - C1 = sum_j a_j h_j with a_j = -q / (bD)_j.
  double resistance = 0.0;
  for (std::size_t j = 0; j < n; ++j) resistance += stack.thickness(j) / stack.layer(j).bD();
  flux_ = (bdata.C1 - bdata.C0) / resistance;

  double top_value = bdata.C0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = -flux_ / stack.layer(j).bD();
    slope_[j] = a;
    offset_[j] = top_value - a * stack.top(j);
    top_value = a * stack.bottom(j) + offset_[j];
  }
  // pin the bottom value exactly; the drift is a few ulps of the summation
  const std::size_t last = n - 1;
  offset_[last] += bdata.C1 - (slope_[last] * stack.bottom(last) + offset_[last]);
}

double ConductionLift::value(double z) const {
  if (slope_.empty()) return 0.0;
  std::size_t j = slope_.size() - 1;
  for (std::size_t i = 0; i + 1 < slope_.size(); ++i) {
    if (z > interfaces_[i + 1]) {
      j = i;
      break;
    }
  }
  return value_in_layer(j, z);
}

}  // namespace layercon

#pragma once

// Vertical Sturm-Liouville problem for one horizontal wavenumber kappa:
//
//   -(p v')' + p kappa^2 v = lambda rho v   on each layer,  p = b D,
//   v(0) = v(-H) = 0,  v and p v' continuous across interfaces,
//
// with rho = 1 (plain L2 weight, the default) or rho = b (porosity weight).
// Eigenvalues are bracketed by oscillation counting on the shooting
// solution and refined on its terminal value; eigenfunctions are stored as
// exact per-layer trig/hyperbolic/affine pieces.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "layercon/layer_stack.hpp"

namespace layercon {

enum class BasisWeight { unit, porosity };

inline double layer_weight(const LayerParams& p, BasisWeight w) {
  return w == BasisWeight::porosity ? p.b : 1.0;
}

/// Shooting state (v, p v') stored as scaled values; the true state is
/// (v, flux) * exp(log_scale).
struct TransferState {
  double v = 0.0;
  double flux = 1.0;
  double log_scale = 0.0;
  long crossings = 0;
};

/// Exact constant-coefficient propagation of (v, p v') upward across one
/// layer of the given thickness. Interior zeros of v are added to
/// `crossings`; a zero landing exactly on the far end is counted only when
/// `count_far_end` is set. Renormalizes so max(|v|, |flux|) is in [1/2, 1).
TransferState propagate_layer(const TransferState& state, const LayerParams& layer,
                              double thickness, double kappa, double lambda,
                              BasisWeight weight = BasisWeight::unit, bool count_far_end = true);

struct Dispersion {
  double F = 0.0;          // scaled v(0) of the shot started at (0, 1) on z = -H
  long count = 0;          // eigenvalues strictly below lambda
  double log_scale = 0.0;  // true v(0) = F * exp(log_scale)
};

Dispersion dispersion_and_count(const LayerStack& stack, double kappa, double lambda,
                                BasisWeight weight = BasisWeight::unit);

class EigenSolveError : public std::runtime_error {
 public:
  EigenSolveError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

/// One layer's piece of an eigenfunction, v = a f1 + b f2 with bounded
/// basis functions (|f| <= ~1.6 on the layer):
///   trig:        f1 = cos(r (z - mid)),  f2 = sin(r (z - mid))
///   hyperbolic:  f1 = cosh(r (z - mid)), f2 = sinh(r (z - mid))     (r h <= 2)
///   exponential: f1 = exp(r (z - top)),  f2 = exp(-r (z - bottom))   (r h > 2)
///   affine:      f1 = 1,                 f2 = (z - mid)
struct LayerPiece {
  enum class Kind { trig, hyperbolic, exponential, affine };
  Kind kind = Kind::affine;
  double rate = 0.0;
  double top = 0.0;
  double bottom = 0.0;
  double p = 1.0;
  double a = 0.0;
  double b = 0.0;

  double mid() const { return 0.5 * (top + bottom); }
  double value(double z) const;
  double derivative(double z) const;
  /// Basis values (f1, f2) and derivatives (f1', f2') at z.
  void basis(double z, double f[2], double df[2]) const;
  /// Exact integrals (f1 f1, f1 f2, f2 f2) over the layer.
  std::array<double, 3> basis_gram() const;
  /// Exact integral of this piece times another piece of the same layer and
  /// kind (same basis).
  double integral_product(const LayerPiece& other) const;
  double integral_sq() const { return integral_product(*this); }
};

LayerPiece::Kind piece_kind(double s, double thickness);

class Eigenfunction {
 public:
  Eigenfunction() = default;
  explicit Eigenfunction(std::vector<LayerPiece> pieces) : pieces_(std::move(pieces)) {}

  /// Evaluation at z; points on an interface use the layer below.
  double value(double z) const;
  double derivative(double z) const;
  double flux(double z) const;
  /// One-sided evaluation using layer j's piece (z may sit on its boundary).
  double value_in_layer(std::size_t j, double z) const { return pieces_[j].value(z); }
  double derivative_in_layer(std::size_t j, double z) const { return pieces_[j].derivative(z); }

  const std::vector<LayerPiece>& pieces() const { return pieces_; }
  std::size_t layer_at(double z) const;

 private:
  std::vector<LayerPiece> pieces_;
};

/// v_k(z_q) and v_k'(z_q) on a fixed node set, row-major (node, k).
struct Traces {
  std::size_t nodes = 0;
  std::size_t modes = 0;
  std::vector<double> values;
  std::vector<double> derivatives;

  double value(std::size_t q, std::size_t k) const { return values[q * modes + k]; }
  double derivative(std::size_t q, std::size_t k) const { return derivatives[q * modes + k]; }
};

class VerticalBasis {
 public:
  VerticalBasis() = default;
  VerticalBasis(double kappa, BasisWeight weight, std::vector<double> eigenvalues,
                std::vector<Eigenfunction> functions)
      : kappa_(kappa), weight_(weight), eigenvalues_(std::move(eigenvalues)),
        functions_(std::move(functions)) {}

  double kappa() const { return kappa_; }
  BasisWeight weight() const { return weight_; }
  std::size_t size() const { return eigenvalues_.size(); }
  double eigenvalue(std::size_t k) const { return eigenvalues_[k]; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const Eigenfunction& function(std::size_t k) const { return functions_[k]; }

  /// Samples every eigenfunction at the given nodes. `node_layers[q]` names
  /// the layer whose piece is used for node q.
  Traces traces(std::span<const double> nodes, std::span<const std::size_t> node_layers) const;

 private:
  double kappa_ = 0.0;
  BasisWeight weight_ = BasisWeight::unit;
  std::vector<double> eigenvalues_;
  std::vector<Eigenfunction> functions_;
};

/// First `kmax` eigenpairs for wavenumber kappa. Eigenvalues are refined to
/// near machine precision; eigenfunctions are normalized so that
/// integral(rho v^2) = 1 and p v'(-H) > 0.
VerticalBasis find_eigenpairs(const LayerStack& stack, double kappa, int kmax,
                              BasisWeight weight = BasisWeight::unit);

/// Eigenvalues of the P1 finite-element discretization of the same weak
/// form on a mesh with `mesh_density` elements per unit length in every
/// layer (at least one per layer). Independent of the transfer route.
std::vector<double> fem_oracle_eigs(const LayerStack& stack, double kappa, int kmax,
                                    double mesh_density, BasisWeight weight = BasisWeight::unit);

/// Same, on explicit mesh nodes. Nodes must contain every interface and both
/// ends; otherwise ConfigError.
std::vector<double> fem_oracle_eigs(const LayerStack& stack, double kappa, int kmax,
                                    std::vector<double> nodes,
                                    BasisWeight weight = BasisWeight::unit);

}  // namespace layercon

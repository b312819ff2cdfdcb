#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "layercon/layer_stack.hpp"

namespace layercon {

enum class EndCondition { neumann, dirichlet };

struct ElementSpec {
  int order = 2;               // Lagrange degree, 1..4
  int elements_per_layer = 32;

  bool operator==(const ElementSpec&) const = default;
};

class EllipticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Continuous Lagrange elements on per-layer uniform meshes whose nodes
/// include every interface. Solves, for one horizontal wavenumber kappa,
///
///   integral a (u' q' + kappa^2 u q) dz = rhs(q)   for all discrete q,
///
/// with a piecewise constant per layer and
///   rhs(q) = sum_g w_g (f0_g q(z_g) + f1_g q'(z_g))
/// sampled at quadrature_points(). Neumann ends are natural; Dirichlet ends
/// are homogeneous. For kappa = 0 with Neumann ends the solution is fixed by
/// zero vertical mean.
class ModeEllipticSolver {
 public:
  ModeEllipticSolver(const LayerStack& stack, std::vector<double> coefficient, double kappa,
                     EndCondition ends, ElementSpec spec);
  ~ModeEllipticSolver();
  ModeEllipticSolver(ModeEllipticSolver&&) noexcept;
  ModeEllipticSolver& operator=(ModeEllipticSolver&&) noexcept;

  double kappa() const { return kappa_; }
  std::size_t dof_count() const { return dof_; }
  std::size_t element_count() const { return elements_.size(); }

  /// Element quadrature points (ascending z), their weights and layers.
  const std::vector<double>& quadrature_points() const { return quad_z_; }
  const std::vector<double>& quadrature_weights() const { return quad_w_; }
  const std::vector<std::size_t>& quadrature_layers() const { return quad_layer_; }

  /// Either span may be empty (treated as zero).
  std::vector<double> solve(std::span<const double> f0, std::span<const double> f1) const;

  /// Solution value / derivative inside layer j at z (z may sit on the
  /// layer's boundary, giving the one-sided limit).
  double value(std::span<const double> u, std::size_t layer, double z) const;
  double derivative(std::span<const double> u, std::size_t layer, double z) const;
  /// Integral of u over (-H, 0).
  double integral(std::span<const double> u) const;

  /// Precomputed evaluation at fixed points: row q holds the local dofs and
  /// basis values/derivatives of the element containing points[q].
  struct Sampler {
    std::size_t width = 0;  // order + 1
    std::vector<std::size_t> first_dof;
    std::vector<double> values;
    std::vector<double> derivatives;

    void apply(std::span<const double> u, std::span<double> value_out,
               std::span<double> derivative_out) const;
  };
  Sampler sampler(std::span<const double> points, std::span<const std::size_t> layers) const;

 private:
  struct Element {
    double z0, z1;
    std::size_t layer;
    std::size_t first_dof;
  };
  std::size_t locate(std::size_t layer, double z) const;
  void local_basis(double xi, std::vector<double>& phi, std::vector<double>& dphi) const;

  LayerStack stack_;
  std::vector<double> coeff_;
  double kappa_;
  EndCondition ends_;
  ElementSpec spec_;
  std::vector<double> ref_nodes_;
  std::vector<Element> elements_;
  std::vector<std::size_t> layer_first_element_;
  std::size_t dof_ = 0;
  std::vector<double> quad_z_, quad_w_;
  std::vector<std::size_t> quad_layer_;
  std::size_t quad_per_element_ = 0;
  std::vector<double> quad_phi_, quad_dphi_;  // reference basis at quadrature points
  bool pinned_ = false;

  struct Factor;
  std::unique_ptr<Factor> factor_;
};

}  // namespace layercon

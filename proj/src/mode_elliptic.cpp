#include "layercon/mode_elliptic.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "layercon/quadrature.hpp"

namespace layercon {

struct ModeEllipticSolver::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  std::vector<long> reduced;  // dof -> reduced index, -1 when constrained
  Eigen::Index size = 0;
};

ModeEllipticSolver::~ModeEllipticSolver() = default;
ModeEllipticSolver::ModeEllipticSolver(ModeEllipticSolver&&) noexcept = default;
ModeEllipticSolver& ModeEllipticSolver::operator=(ModeEllipticSolver&&) noexcept = default;

ModeEllipticSolver::ModeEllipticSolver(const LayerStack& stack, std::vector<double> coefficient,
                                       double kappa, EndCondition ends, ElementSpec spec)
    : stack_(stack), coeff_(std::move(coefficient)), kappa_(kappa), ends_(ends), spec_(spec) {
  if (coeff_.size() != stack.layer_count()) {
    throw EllipticError("mode elliptic: one coefficient per layer required");
  }
  for (double a : coeff_) {
    if (!(a > 0.0)) throw EllipticError("mode elliptic: coefficient must be positive");
  }
  if (spec.order < 1 || spec.order > 4) throw EllipticError("mode elliptic: order must be 1..4");
  if (spec.elements_per_layer < 1) throw EllipticError("mode elliptic: need >= 1 element per layer");

  const int order = spec.order;
  ref_nodes_ = gauss_lobatto_points(order);

  // elements in ascending z, bottom layer first
  const std::size_t n_layers = stack.layer_count();
  layer_first_element_.assign(n_layers, 0);
  for (std::size_t i = 0; i < n_layers; ++i) {
    const std::size_t j = n_layers - 1 - i;
    layer_first_element_[j] = elements_.size();
    const double z_bot = stack.bottom(j);
    const double h = stack.thickness(j) / spec.elements_per_layer;
    for (int e = 0; e < spec.elements_per_layer; ++e) {
      const double z0 = z_bot + e * h;
      const double z1 = (e + 1 == spec.elements_per_layer) ? stack.top(j) : z_bot + (e + 1) * h;
      elements_.push_back({z0, z1, j, elements_.size() * static_cast<std::size_t>(order)});
    }
  }
  dof_ = elements_.size() * order + 1;

  const QuadratureRule rule = gauss_legendre(order + 4);
  quad_per_element_ = rule.nodes.size();
  const std::size_t width = order + 1;
  quad_phi_.resize(quad_per_element_ * width);
  quad_dphi_.resize(quad_per_element_ * width);
  std::vector<double> phi, dphi;
  for (std::size_t g = 0; g < quad_per_element_; ++g) {
    local_basis(rule.nodes[g], phi, dphi);
    std::copy(phi.begin(), phi.end(), quad_phi_.begin() + g * width);
    std::copy(dphi.begin(), dphi.end(), quad_dphi_.begin() + g * width);
  }
  for (const auto& el : elements_) {
    const double half = 0.5 * (el.z1 - el.z0);
    for (std::size_t g = 0; g < quad_per_element_; ++g) {
      quad_z_.push_back(el.z0 + (rule.nodes[g] + 1.0) * half);
      quad_w_.push_back(rule.weights[g] * half);
      quad_layer_.push_back(el.layer);
    }
  }

  factor_ = std::make_unique<Factor>();
  auto& red = factor_->reduced;
  red.assign(dof_, 0);
  pinned_ = (ends == EndCondition::neumann && kappa == 0.0);
  if (ends == EndCondition::dirichlet) {
    red.front() = -1;
    red.back() = -1;
  } else if (pinned_) {
    red.front() = -1;
  }
  long next = 0;
  for (auto& r : red) r = (r < 0) ? -1 : next++;
  factor_->size = next;

  std::vector<Eigen::Triplet<double>> trips;
  const double kk = kappa * kappa;
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    const double a = coeff_[el.layer];
    const double half = 0.5 * (el.z1 - el.z0);
    for (std::size_t g = 0; g < quad_per_element_; ++g) {
      const double w = rule.weights[g] * half;
      const double* ph = &quad_phi_[g * width];
      const double* dph = &quad_dphi_[g * width];
      for (std::size_t i = 0; i < width; ++i) {
        const long ri = red[el.first_dof + i];
        if (ri < 0) continue;
        for (std::size_t j = 0; j < width; ++j) {
          const long rj = red[el.first_dof + j];
          if (rj < 0) continue;
          const double v = a * (dph[i] * dph[j] / (half * half) + kk * ph[i] * ph[j]);
          trips.emplace_back(ri, rj, w * v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> A(factor_->size, factor_->size);
  A.setFromTriplets(trips.begin(), trips.end());
  factor_->ldlt.compute(A);
  if (factor_->ldlt.info() != Eigen::Success) {
    throw EllipticError("mode elliptic: factorization failed (singular system)");
  }
}

void ModeEllipticSolver::local_basis(double xi, std::vector<double>& phi,
                                     std::vector<double>& dphi) const {
  const std::size_t n = ref_nodes_.size();
  phi.assign(n, 0.0);
  dphi.assign(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double prod = 1.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b != a) prod *= (xi - ref_nodes_[b]) / (ref_nodes_[a] - ref_nodes_[b]);
    }
    phi[a] = prod;
    double d = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c == a) continue;
      double term = 1.0 / (ref_nodes_[a] - ref_nodes_[c]);
      for (std::size_t b = 0; b < n; ++b) {
        if (b != a && b != c) term *= (xi - ref_nodes_[b]) / (ref_nodes_[a] - ref_nodes_[b]);
      }
      d += term;
    }
    dphi[a] = d;
  }
}

std::vector<double> ModeEllipticSolver::solve(std::span<const double> f0,
                                              std::span<const double> f1) const {
  const std::size_t width = spec_.order + 1;
  std::vector<double> load(dof_, 0.0);
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    const double half = 0.5 * (el.z1 - el.z0);
    for (std::size_t g = 0; g < quad_per_element_; ++g) {
      const std::size_t qi = e * quad_per_element_ + g;
      const double g0 = f0.empty() ? 0.0 : f0[qi];
      const double g1 = f1.empty() ? 0.0 : f1[qi];
      if (g0 == 0.0 && g1 == 0.0) continue;
      const double w = quad_w_[qi];
      for (std::size_t i = 0; i < width; ++i) {
        load[el.first_dof + i] +=
            w * (g0 * quad_phi_[g * width + i] + g1 * quad_dphi_[g * width + i] / half);
      }
    }
  }
  if (pinned_) {
    double total = 0.0, magnitude = 0.0;
    for (double v : load) {
      total += v;
      magnitude += std::abs(v);
    }
    if (std::abs(total) > 1e-10 * magnitude) {
      throw EllipticError("mode elliptic: incompatible right-hand side for pure Neumann problem");
    }
  }
  Eigen::VectorXd rhs(factor_->size);
  for (std::size_t i = 0; i < dof_; ++i) {
    const long r = factor_->reduced[i];
    if (r >= 0) rhs(r) = load[i];
  }
  const Eigen::VectorXd sol = factor_->ldlt.solve(rhs);
  std::vector<double> u(dof_, 0.0);
  for (std::size_t i = 0; i < dof_; ++i) {
    const long r = factor_->reduced[i];
    if (r >= 0) u[i] = sol(r);
  }
  if (pinned_) {
    const double mean = integral(u) / stack_.depth();
    for (double& v : u) v -= mean;
  }
  return u;
}

std::size_t ModeEllipticSolver::locate(std::size_t layer, double z) const {
  const std::size_t first = layer_first_element_[layer];
  const auto n = static_cast<std::size_t>(spec_.elements_per_layer);
  const double h = stack_.thickness(layer) / n;
  const double pos = (z - stack_.bottom(layer)) / h;
  std::size_t e = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
  return first + std::min(e, n - 1);
}

double ModeEllipticSolver::value(std::span<const double> u, std::size_t layer, double z) const {
  const auto& el = elements_[locate(layer, z)];
  const double half = 0.5 * (el.z1 - el.z0);
  std::vector<double> phi, dphi;
  local_basis((z - el.z0) / half - 1.0, phi, dphi);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * u[el.first_dof + i];
  return s;
}

double ModeEllipticSolver::derivative(std::span<const double> u, std::size_t layer,
                                      double z) const {
  const auto& el = elements_[locate(layer, z)];
  const double half = 0.5 * (el.z1 - el.z0);
  std::vector<double> phi, dphi;
  local_basis((z - el.z0) / half - 1.0, phi, dphi);
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += dphi[i] * u[el.first_dof + i];
  return s / half;
}

double ModeEllipticSolver::integral(std::span<const double> u) const {
  const std::size_t width = spec_.order + 1;
  double s = 0.0;
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& el = elements_[e];
    for (std::size_t g = 0; g < quad_per_element_; ++g) {
      double v = 0.0;
      for (std::size_t i = 0; i < width; ++i) v += quad_phi_[g * width + i] * u[el.first_dof + i];
      s += quad_w_[e * quad_per_element_ + g] * v;
    }
  }
  return s;
}

ModeEllipticSolver::Sampler ModeEllipticSolver::sampler(std::span<const double> points,
                                                        std::span<const std::size_t> layers) const {
  Sampler s;
  s.width = spec_.order + 1;
  s.first_dof.resize(points.size());
  s.values.resize(points.size() * s.width);
  s.derivatives.resize(points.size() * s.width);
  std::vector<double> phi, dphi;
  for (std::size_t q = 0; q < points.size(); ++q) {
    const auto& el = elements_[locate(layers[q], points[q])];
    const double half = 0.5 * (el.z1 - el.z0);
    local_basis((points[q] - el.z0) / half - 1.0, phi, dphi);
    s.first_dof[q] = el.first_dof;
    for (std::size_t i = 0; i < s.width; ++i) {
      s.values[q * s.width + i] = phi[i];
      s.derivatives[q * s.width + i] = dphi[i] / half;
    }
  }
  return s;
}

void ModeEllipticSolver::Sampler::apply(std::span<const double> u, std::span<double> value_out,
                                        std::span<double> derivative_out) const {
  for (std::size_t q = 0; q < first_dof.size(); ++q) {
    const double* uu = u.data() + first_dof[q];
    double v = 0.0, d = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      v += values[q * width + i] * uu[i];
      d += derivatives[q * width + i] * uu[i];
    }
    if (!value_out.empty()) value_out[q] = v;
    if (!derivative_out.empty()) derivative_out[q] = d;
  }
}

}  // namespace layercon

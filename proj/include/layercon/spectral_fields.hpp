#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "layercon/layer_stack.hpp"
#include "layercon/vertical_spectra.hpp"

namespace layercon {

using cplx = std::complex<double>;

/// Tensor grid: Nx uniform points on [0, L) times per-layer Gauss-Legendre
/// nodes. Vertical nodes are stored in ascending z (bottom layer first).
class Grid {
 public:
  Grid(const LayerStack& stack, int nx, int nq);

  const LayerStack& stack() const { return stack_; }
  int nx() const { return nx_; }
  int nq() const { return nq_; }
  double width() const { return stack_.width(); }
  double dx() const { return stack_.width() / nx_; }
  double x(std::size_t i) const { return dx() * static_cast<double>(i); }

  std::size_t nz() const { return z_.size(); }
  const std::vector<double>& z() const { return z_; }
  /// Quadrature weights in z (sum to H).
  const std::vector<double>& weights() const { return w_; }
  const std::vector<std::size_t>& node_layers() const { return layer_; }
  /// First node index of layer j (nodes of a layer are contiguous).
  std::size_t layer_begin(std::size_t j) const { return first_[j]; }

  /// Number of stored horizontal modes m = 0 .. modes()-1 (Nx / 2; the
  /// Nyquist mode is not kept).
  std::size_t modes() const { return static_cast<std::size_t>(nx_ / 2); }
  /// Highest mode kept by dealias(): floor(Nx / 3).
  std::size_t dealias_limit() const { return static_cast<std::size_t>(nx_ / 3); }
  double kappa(std::size_t m) const;

  /// Smallest spacing between adjacent vertical nodes of one layer.
  double min_dz() const { return min_dz_; }
  std::size_t size() const { return nz() * static_cast<std::size_t>(nx_); }

 private:
  LayerStack stack_;
  int nx_;
  int nq_;
  std::vector<double> z_, w_;
  std::vector<std::size_t> layer_, first_;
  double min_dz_ = 0.0;
};

/// Scalar field in dual form. Nodal values are stored row per vertical node:
/// nodal[q * Nx + i] = f(x_i, z_q). Modal coefficients modal[m * K + k]
/// multiply e^{i kappa_m x} v_{m,k}(z); negative m are implied by Hermitian
/// symmetry, so Im of the m = 0 row must vanish.
struct SpectralField {
  std::size_t modes = 0;
  std::size_t kmax = 0;
  std::size_t nx = 0;
  std::size_t nz = 0;
  std::vector<cplx> modal;
  std::vector<double> nodal;
  bool modal_valid = false;
  bool nodal_valid = false;

  cplx& c(std::size_t m, std::size_t k) { return modal[m * kmax + k]; }
  cplx c(std::size_t m, std::size_t k) const { return modal[m * kmax + k]; }
  double& f(std::size_t i, std::size_t q) { return nodal[q * nx + i]; }
  double f(std::size_t i, std::size_t q) const { return nodal[q * nx + i]; }
};

/// Per-mode vertical profiles g_m(z_q), stored as re/im at [m * nz + q].
struct ModeRows {
  std::size_t modes = 0;
  std::size_t nz = 0;
  std::vector<double> re, im;

  void resize(std::size_t m, std::size_t n) {
    modes = m;
    nz = n;
    re.assign(m * n, 0.0);
    im.assign(m * n, 0.0);
  }
};

struct Norms {
  double L2 = 0.0;
  double V = 0.0;     // sqrt of integral bD |grad f|^2
  double L4 = 0.0;    // grid-sampled
  double Linf = 0.0;  // max over nodes
  double W = 0.0;
  double bL2 = 0.0;   // sqrt of integral b f^2
};

/// Grid plus one vertical eigenbasis per stored mode, with the sampled
/// traces and projection matrices used by the transforms.
///
/// Fourier convention: c = (1/Nx) sum_i f_i e^{-i kappa x_i} projected on
/// v_k; synthesis is f = sum over m in (-Nx/2, Nx/2) of c_m e^{i kappa x} v.
/// All norms integrate over the whole strip (0, L) x (-H, 0).
class SpectralSpace {
 public:
  SpectralSpace(const Grid& grid, int kmax, BasisWeight weight);
  ~SpectralSpace();
  SpectralSpace(const SpectralSpace&) = delete;
  SpectralSpace& operator=(const SpectralSpace&) = delete;

  const Grid& grid() const { return grid_; }
  std::size_t kmax() const { return kmax_; }
  std::size_t modes() const { return grid_.modes(); }
  BasisWeight weight() const { return weight_; }
  const VerticalBasis& basis(std::size_t m) const { return bases_[m]; }
  const Traces& traces(std::size_t m) const { return traces_[m]; }
  /// Basis weight rho at vertical node q (1, or the porosity).
  double rho(std::size_t q) const { return rho_[q]; }
  /// Largest deviation of the grid-quadrature Gram matrix of any mode's
  /// basis from the identity. Above ~1e-10 the vertical quadrature is too
  /// coarse for Kmax (raise nq).
  double quadrature_gram_error() const { return gram_error_; }

  SpectralField zeros() const;
  SpectralField from_nodal(std::vector<double> nodal) const;
  SpectralField from_modal(std::vector<cplx> modal) const;

  /// Fill the missing representation. Throws ConfigError on a size mismatch
  /// and std::invalid_argument on a non-real m = 0 row.
  void to_modal(SpectralField& f) const;
  void to_nodal(SpectralField& f) const;
  /// Nodal x- and z-derivatives from the modal representation.
  void gradient_nodal(const SpectralField& f, std::vector<double>& fx,
                      std::vector<double>& fz) const;
  /// Zero modes above floor(Nx / 3); nodal values are refreshed if valid.
  void dealias(SpectralField& f) const;

  Norms norms(const SpectralField& f) const;
  /// sqrt of integral bD |grad f|^2, exact in the basis.
  double v_norm(const SpectralField& f) const;
  /// || L f ||_{L2} with L f = -div(bD grad f), computed per mode.
  double operator_norm(const SpectralField& f) const;

  // Lower-level pieces shared with the transport code. Per-mode vertical
  // profiles use ModeRows; coefficient vectors use the SpectralField layout.

  /// Horizontal transform of nodal data: (1/Nx) sum_i f e^{-i kappa_m x_i}.
  void forward_rows(std::span<const double> nodal, ModeRows& out) const;
  /// Inverse over the stored modes (Nyquist treated as zero).
  void inverse_rows(const ModeRows& rows, std::vector<double>& nodal) const;
  /// Galerkin coefficients sum_q w_q g_m(z_q) v_{m,k}(z_q); `weighted` adds
  /// the basis weight rho, `derivative` uses v' in place of v.
  void project_rows(const ModeRows& rows, bool weighted, bool derivative,
                    std::vector<cplx>& modal) const;
  /// g_m(z_q) = sum_k c_{m,k} v_{m,k}(z_q) (or v').
  void synthesize_rows(std::span<const cplx> modal, bool derivative, ModeRows& rows) const;

 private:
  void check(const SpectralField& f) const;

  Grid grid_;
  std::size_t kmax_;
  BasisWeight weight_;
  std::vector<VerticalBasis> bases_;
  std::vector<Traces> traces_;
  std::vector<double> rho_;
  double gram_error_ = 0.0;
  // per mode, row-major (K x Nz): w rho v, w v, w v'
  std::vector<std::vector<double>> proj_weighted_, proj_plain_, proj_deriv_;
  // per mode, row-major (Nz x K): v, v'
  std::vector<std::vector<double>> synth_, synth_deriv_;

  struct Plans;
  std::unique_ptr<Plans> plans_;
};

}  // namespace layercon

#include "layercon/spectral_fields.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fftw3.h>

#include "layercon/kernels.hpp"
#include "layercon/parallel.hpp"
#include "layercon/quadrature.hpp"

namespace layercon {
namespace {

// the FFTW planner is not reentrant
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void validate_rule(const QuadratureRule& rule, int nq) {
  for (int d = 0; d <= 2 * nq - 1; ++d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], d);
    const double exact = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
    if (std::abs(sum - exact) > 1e-12) {
      throw ConfigError("Gauss rule with " + std::to_string(nq) +
                        " nodes fails the monomial check at degree " + std::to_string(d));
    }
  }
}

}  // namespace

Grid::Grid(const LayerStack& stack, int nx, int nq) : stack_(stack), nx_(nx), nq_(nq) {
  if (nx < 4 || nx % 2 != 0) throw ConfigError("grid: Nx must be even and >= 4");
  if (nq < 4) throw ConfigError("grid: need at least 4 quadrature nodes per layer");
  const QuadratureRule rule = gauss_legendre(nq);
  validate_rule(rule, nq);

  const std::size_t n = stack.layer_count();
  first_.assign(n, 0);
  min_dz_ = stack.depth();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    first_[j] = z_.size();
    const double half = 0.5 * stack.thickness(j);
    const double mid = 0.5 * (stack.top(j) + stack.bottom(j));
    for (int g = 0; g < nq; ++g) {
      const double z = mid + half * rule.nodes[g];
      if (!(z > stack.bottom(j) && z < stack.top(j))) {
        throw ConfigError("grid: quadrature node on an interface");
      }
      z_.push_back(z);
      w_.push_back(half * rule.weights[g]);
      layer_.push_back(j);
      if (g > 0) min_dz_ = std::min(min_dz_, half * (rule.nodes[g] - rule.nodes[g - 1]));
    }
  }
}

double Grid::kappa(std::size_t m) const {
  return 2.0 * std::numbers::pi * static_cast<double>(m) / stack_.width();
}

// ---------------------------------------------------------------------------

struct SpectralSpace::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  int nx = 0;
  int rows = 0;
  int half = 0;  // nx / 2 + 1

  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

namespace {

struct RealBuf {
  double* p;
  explicit RealBuf(std::size_t n) : p(fftw_alloc_real(n)) {}
  ~RealBuf() { fftw_free(p); }
  RealBuf(const RealBuf&) = delete;
  RealBuf& operator=(const RealBuf&) = delete;
};

struct ComplexBuf {
  fftw_complex* p;
  explicit ComplexBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~ComplexBuf() { fftw_free(p); }
  ComplexBuf(const ComplexBuf&) = delete;
  ComplexBuf& operator=(const ComplexBuf&) = delete;
};

}  // namespace

SpectralSpace::SpectralSpace(const Grid& grid, int kmax, BasisWeight weight)
    : grid_(grid), kmax_(static_cast<std::size_t>(kmax)), weight_(weight) {
  if (kmax < 1) throw ConfigError("spectral space: Kmax must be >= 1");
  const std::size_t M = grid.modes();
  const std::size_t nz = grid.nz();
  const std::size_t K = kmax_;

  rho_.resize(nz);
  for (std::size_t q = 0; q < nz; ++q) {
    rho_[q] = layer_weight(grid.stack().layer(grid.node_layers()[q]), weight);
  }

  bases_.resize(M);
  traces_.resize(M);
  proj_weighted_.resize(M);
  proj_plain_.resize(M);
  proj_deriv_.resize(M);
  synth_.resize(M);
  synth_deriv_.resize(M);
  std::vector<double> gram_dev(M, 0.0);
  parallel_for(M, [&](std::size_t m) {
    bases_[m] = find_eigenpairs(grid.stack(), grid.kappa(m), kmax, weight);
    traces_[m] = bases_[m].traces(grid.z(), grid.node_layers());
    const Traces& t = traces_[m];
    auto& pw = proj_weighted_[m];
    auto& pp = proj_plain_[m];
    auto& pd = proj_deriv_[m];
    pw.resize(K * nz);
    pp.resize(K * nz);
    pd.resize(K * nz);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t q = 0; q < nz; ++q) {
        const double w = grid.weights()[q];
        pp[k * nz + q] = w * t.value(q, k);
        pw[k * nz + q] = w * rho_[q] * t.value(q, k);
        pd[k * nz + q] = w * t.derivative(q, k);
      }
    }
    synth_[m] = t.values;
    synth_deriv_[m] = t.derivatives;
    double dev = 0.0;
    for (std::size_t a = 0; a < K; ++a) {
      for (std::size_t b = a; b < K; ++b) {
        double g = 0.0;
        for (std::size_t q = 0; q < nz; ++q) g += pw[a * nz + q] * t.value(q, b);
        dev = std::max(dev, std::abs(g - (a == b ? 1.0 : 0.0)));
      }
    }
    gram_dev[m] = dev;
  });
  gram_error_ = *std::max_element(gram_dev.begin(), gram_dev.end());

  plans_ = std::make_unique<Plans>();
  plans_->nx = grid.nx();
  plans_->rows = static_cast<int>(nz);
  plans_->half = grid.nx() / 2 + 1;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    RealBuf r(static_cast<std::size_t>(grid.nx()) * nz);
    ComplexBuf c(static_cast<std::size_t>(plans_->half) * nz);
    int n[1] = {grid.nx()};
    plans_->forward = fftw_plan_many_dft_r2c(1, n, plans_->rows, r.p, nullptr, 1, grid.nx(), c.p,
                                             nullptr, 1, plans_->half, FFTW_ESTIMATE);
    plans_->inverse = fftw_plan_many_dft_c2r(1, n, plans_->rows, c.p, nullptr, 1, plans_->half, r.p,
                                             nullptr, 1, grid.nx(), FFTW_ESTIMATE);
  }
  if (!plans_->forward || !plans_->inverse) throw std::runtime_error("FFTW planning failed");
}

SpectralSpace::~SpectralSpace() = default;

SpectralField SpectralSpace::zeros() const {
  SpectralField f;
  f.modes = modes();
  f.kmax = kmax_;
  f.nx = static_cast<std::size_t>(grid_.nx());
  f.nz = grid_.nz();
  f.modal.assign(f.modes * f.kmax, cplx{});
  f.nodal.assign(f.nx * f.nz, 0.0);
  f.modal_valid = true;
  f.nodal_valid = true;
  return f;
}

SpectralField SpectralSpace::from_nodal(std::vector<double> nodal) const {
  SpectralField f = zeros();
  if (nodal.size() != f.nodal.size()) throw ConfigError("nodal data does not match the grid");
  f.nodal = std::move(nodal);
  f.modal_valid = false;
  return f;
}

SpectralField SpectralSpace::from_modal(std::vector<cplx> modal) const {
  SpectralField f = zeros();
  if (modal.size() != f.modal.size()) throw ConfigError("modal data does not match the basis");
  f.modal = std::move(modal);
  f.nodal_valid = false;
  return f;
}

void SpectralSpace::check(const SpectralField& f) const {
  if (f.modes != modes() || f.kmax != kmax_ || f.nx != static_cast<std::size_t>(grid_.nx()) ||
      f.nz != grid_.nz()) {
    throw ConfigError("field does not match the grid/basis");
  }
}

void SpectralSpace::forward_rows(std::span<const double> nodal, ModeRows& out) const {
  const std::size_t nx = static_cast<std::size_t>(grid_.nx());
  const std::size_t nz = grid_.nz();
  const std::size_t half = static_cast<std::size_t>(plans_->half);
  RealBuf in(nx * nz);
  ComplexBuf spec(half * nz);
  std::copy(nodal.begin(), nodal.end(), in.p);
  fftw_execute_dft_r2c(plans_->forward, in.p, spec.p);
  const std::size_t M = modes();
  out.resize(M, nz);
  const double scale = 1.0 / static_cast<double>(nx);
  for (std::size_t q = 0; q < nz; ++q) {
    for (std::size_t m = 0; m < M; ++m) {
      out.re[m * nz + q] = spec.p[q * half + m][0] * scale;
      out.im[m * nz + q] = spec.p[q * half + m][1] * scale;
    }
  }
  for (std::size_t q = 0; q < nz; ++q) out.im[q] = 0.0;
}

void SpectralSpace::inverse_rows(const ModeRows& rows, std::vector<double>& nodal) const {
  const std::size_t nx = static_cast<std::size_t>(grid_.nx());
  const std::size_t nz = grid_.nz();
  const std::size_t half = static_cast<std::size_t>(plans_->half);
  const std::size_t M = modes();
  ComplexBuf spec(half * nz);
  RealBuf out(nx * nz);
  for (std::size_t q = 0; q < nz; ++q) {
    for (std::size_t m = 0; m < half; ++m) {
      const bool kept = m < M;
      spec.p[q * half + m][0] = kept ? rows.re[m * nz + q] : 0.0;
      spec.p[q * half + m][1] = (kept && m > 0) ? rows.im[m * nz + q] : 0.0;
    }
  }
  fftw_execute_dft_c2r(plans_->inverse, spec.p, out.p);
  nodal.assign(out.p, out.p + nx * nz);
}

void SpectralSpace::project_rows(const ModeRows& rows, bool weighted, bool derivative,
                                 std::vector<cplx>& modal) const {
  const std::size_t M = modes();
  const std::size_t nz = grid_.nz();
  const std::size_t K = kmax_;
  modal.assign(M * K, cplx{});
  const auto& kt = kernels::active();
  const auto& mats = derivative ? proj_deriv_ : (weighted ? proj_weighted_ : proj_plain_);
  parallel_for(M, [&](std::size_t m) {
    std::vector<double> yr(K), yi(K);
    kt.gemv2(mats[m].data(), K, nz, rows.re.data() + m * nz, rows.im.data() + m * nz, yr.data(),
             yi.data());
    for (std::size_t k = 0; k < K; ++k) modal[m * K + k] = {yr[k], yi[k]};
  });
}

void SpectralSpace::synthesize_rows(std::span<const cplx> modal, bool derivative,
                                    ModeRows& rows) const {
  const std::size_t M = modes();
  const std::size_t nz = grid_.nz();
  const std::size_t K = kmax_;
  rows.resize(M, nz);
  const auto& kt = kernels::active();
  const auto& mats = derivative ? synth_deriv_ : synth_;
  parallel_for(M, [&](std::size_t m) {
    std::vector<double> cr(K), ci(K);
    for (std::size_t k = 0; k < K; ++k) {
      cr[k] = modal[m * K + k].real();
      ci[k] = modal[m * K + k].imag();
    }
    kt.gemv2(mats[m].data(), nz, K, cr.data(), ci.data(), rows.re.data() + m * nz,
             rows.im.data() + m * nz);
  });
}

void SpectralSpace::to_modal(SpectralField& f) const {
  check(f);
  if (!f.nodal_valid) throw std::invalid_argument("to_modal: nodal values not valid");
  ModeRows rows;
  forward_rows(f.nodal, rows);
  project_rows(rows, true, false, f.modal);
  f.modal_valid = true;
}

void SpectralSpace::to_nodal(SpectralField& f) const {
  check(f);
  if (!f.modal_valid) throw std::invalid_argument("to_nodal: modal coefficients not valid");
  double scale = 0.0, worst = 0.0;
  for (const auto& c : f.modal) scale = std::max(scale, std::abs(c));
  for (std::size_t k = 0; k < kmax_; ++k) worst = std::max(worst, std::abs(f.c(0, k).imag()));
  if (worst > 1e-12 * scale) {
    throw std::invalid_argument("to_nodal: mean mode is not real (Hermitian symmetry violated)");
  }
  ModeRows rows;
  synthesize_rows(f.modal, false, rows);
  inverse_rows(rows, f.nodal);
  f.nodal_valid = true;
}

void SpectralSpace::gradient_nodal(const SpectralField& f, std::vector<double>& fx,
                                   std::vector<double>& fz) const {
  check(f);
  if (!f.modal_valid) throw std::invalid_argument("gradient_nodal: modal coefficients not valid");
  const std::size_t nz = grid_.nz();
  ModeRows rows;
  synthesize_rows(f.modal, false, rows);
  for (std::size_t m = 0; m < modes(); ++m) {
    const double kap = grid_.kappa(m);
    for (std::size_t q = 0; q < nz; ++q) {
      const double re = rows.re[m * nz + q], im = rows.im[m * nz + q];
      rows.re[m * nz + q] = -kap * im;
      rows.im[m * nz + q] = kap * re;
    }
  }
  inverse_rows(rows, fx);
  synthesize_rows(f.modal, true, rows);
  inverse_rows(rows, fz);
}

void SpectralSpace::dealias(SpectralField& f) const {
  check(f);
  if (!f.modal_valid) throw std::invalid_argument("dealias: modal coefficients not valid");
  for (std::size_t m = grid_.dealias_limit() + 1; m < modes(); ++m) {
    for (std::size_t k = 0; k < kmax_; ++k) f.c(m, k) = {};
  }
  if (f.nodal_valid) to_nodal(f);
}

double SpectralSpace::v_norm(const SpectralField& f) const {
  check(f);
  double sum = 0.0;
  for (std::size_t m = 0; m < modes(); ++m) {
    double part = 0.0;
    for (std::size_t k = 0; k < kmax_; ++k) part += bases_[m].eigenvalue(k) * std::norm(f.c(m, k));
    sum += (m == 0 ? 1.0 : 2.0) * part;
  }
  return std::sqrt(grid_.width() * sum);
}

double SpectralSpace::operator_norm(const SpectralField& f) const {
  check(f);
  const double L = grid_.width();
  double sum = 0.0;
  if (weight_ == BasisWeight::unit) {
    for (std::size_t m = 0; m < modes(); ++m) {
      double part = 0.0;
      for (std::size_t k = 0; k < kmax_; ++k) {
        const double lam = bases_[m].eigenvalue(k);
        part += lam * lam * std::norm(f.c(m, k));
      }
      sum += (m == 0 ? 1.0 : 2.0) * part;
    }
    return std::sqrt(L * sum);
  }
  // L f = sum c lambda rho v per mode
  std::vector<cplx> scaled(f.modal.size());
  for (std::size_t m = 0; m < modes(); ++m) {
    for (std::size_t k = 0; k < kmax_; ++k) scaled[m * kmax_ + k] = bases_[m].eigenvalue(k) * f.c(m, k);
  }
  ModeRows rows;
  synthesize_rows(scaled, false, rows);
  const std::size_t nz = grid_.nz();
  for (std::size_t m = 0; m < modes(); ++m) {
    double part = 0.0;
    for (std::size_t q = 0; q < nz; ++q) {
      const double r2 = rho_[q] * rho_[q];
      part += grid_.weights()[q] * r2 *
              (rows.re[m * nz + q] * rows.re[m * nz + q] + rows.im[m * nz + q] * rows.im[m * nz + q]);
    }
    sum += (m == 0 ? 1.0 : 2.0) * part;
  }
  return std::sqrt(L * sum);
}

Norms SpectralSpace::norms(const SpectralField& field) const {
  check(field);
  SpectralField f = field;
  if (!f.modal_valid) to_modal(f);
  if (!f.nodal_valid) to_nodal(f);

  const auto& kt = kernels::active();
  const std::size_t nx = f.nx, nz = f.nz;
  const double dx = grid_.dx();
  Norms out;

  double l2 = 0.0, bl2 = 0.0, l4 = 0.0, linf = 0.0;
  for (std::size_t q = 0; q < nz; ++q) {
    const double* row = f.nodal.data() + q * nx;
    const double w = grid_.weights()[q] * dx;
    const double s2 = kt.sum_sq(row, nx);
    l2 += w * s2;
    bl2 += w * grid_.stack().layer(grid_.node_layers()[q]).b * s2;
    l4 += w * kt.sum_pow4(row, nx);
    double lo = 0.0, hi = 0.0;
    kt.min_max(row, nx, &lo, &hi);
    linf = std::max({linf, std::abs(lo), std::abs(hi)});
  }
  out.L2 = std::sqrt(l2);
  out.bL2 = std::sqrt(bl2);
  out.L4 = std::sqrt(std::sqrt(l4));
  out.Linf = linf;
  out.V = v_norm(f);

  // W blocks per mode from values, z-derivatives and d/dz(bD d/dz) profiles
  ModeRows val, der, lam;
  synthesize_rows(f.modal, false, val);
  synthesize_rows(f.modal, true, der);
  std::vector<cplx> scaled(f.modal.size());
  for (std::size_t m = 0; m < modes(); ++m) {
    for (std::size_t k = 0; k < kmax_; ++k) scaled[m * kmax_ + k] = bases_[m].eigenvalue(k) * f.c(m, k);
  }
  synthesize_rows(scaled, false, lam);
  double w2 = 0.0;
  for (std::size_t m = 0; m < modes(); ++m) {
    const double kap2 = grid_.kappa(m) * grid_.kappa(m);
    double v2 = 0.0, d2 = 0.0, pd2 = 0.0, g2 = 0.0;
    for (std::size_t q = 0; q < nz; ++q) {
      const std::size_t i = m * nz + q;
      const double w = grid_.weights()[q];
      const double p = grid_.stack().layer(grid_.node_layers()[q]).bD();
      const double a2 = val.re[i] * val.re[i] + val.im[i] * val.im[i];
      const double b2 = der.re[i] * der.re[i] + der.im[i] * der.im[i];
      const double gr = p * kap2 * val.re[i] - rho_[q] * lam.re[i];
      const double gi = p * kap2 * val.im[i] - rho_[q] * lam.im[i];
      v2 += w * a2;
      d2 += w * b2;
      pd2 += w * p * p * b2;
      g2 += w * (gr * gr + gi * gi);
    }
    // |f_x|^2 + |f_xx|^2 + |f_xz|^2 + |g|^2 + |g_x|^2 + |g_z|^2, g = bD f_z
    const double block = kap2 * v2 + kap2 * kap2 * v2 + kap2 * d2 + pd2 + kap2 * pd2 + g2;
    w2 += (m == 0 ? 1.0 : 2.0) * block;
  }
  out.W = std::sqrt(out.V * out.V + grid_.width() * w2);
  return out;
}

}  // namespace layercon

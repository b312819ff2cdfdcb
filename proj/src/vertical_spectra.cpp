#include "layercon/vertical_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "layercon/text.hpp"

namespace layercon {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

// x - sin(x) and sinh(x) - x without cancellation for small x.
double x_minus_sin(double x) {
  if (std::abs(x) > 0.1) return x - std::sin(x);
  const double x2 = x * x;
  return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
}

double sinh_minus_x(double x) {
  if (std::abs(x) > 0.1) return std::sinh(x) - x;
  const double x2 = x * x;
  return x * x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0 * (1.0 + x2 / 72.0)));
}

double squared_rate(double kappa, double lambda, double p, double rho) {
  return kappa * kappa - lambda * rho / p;
}

void renormalize(TransferState& s) {
  const double m = std::max(std::abs(s.v), std::abs(s.flux));
  if (m == 0.0 || !std::isfinite(m)) return;
  int e = 0;
  std::frexp(m, &e);
  s.v = std::ldexp(s.v, -e);
  s.flux = std::ldexp(s.flux, -e);
  s.log_scale += e * kLn2;
}

long sign_change_zero(double v0, double v1, bool count_far_end) {
  if (v0 == 0.0) return 0;
  if (v1 == 0.0) return count_far_end ? 1 : 0;
  return (v0 < 0.0) != (v1 < 0.0) ? 1 : 0;
}

}  // namespace

TransferState propagate_layer(const TransferState& state, const LayerParams& layer,
                              double thickness, double kappa, double lambda, BasisWeight weight,
                              bool count_far_end) {
  const double p = layer.bD();
  const double s = squared_rate(kappa, lambda, p, layer_weight(layer, weight));
  TransferState out = state;
  const double v0 = state.v;
  const double w0 = state.flux;

  if (s < 0.0) {
    // Pruefer form: v = R sin(psi), w / (p omega) = R cos(psi), psi linear in z
    const double omega = std::sqrt(-s);
    const double y0 = w0 / (p * omega);
    const double radius = std::hypot(v0, y0);
    const double psi0 = std::atan2(v0, y0);
    const double psi1 = psi0 + omega * thickness;
    const double before = std::floor(psi0 / kPi);
    const double upto = count_far_end ? std::floor(psi1 / kPi) : std::ceil(psi1 / kPi) - 1.0;
    out.crossings += static_cast<long>(upto - before);
    out.v = radius * std::sin(psi1);
    out.flux = p * omega * radius * std::cos(psi1);
  } else if (s > 0.0) {
    const double sigma = std::sqrt(s);
    const double y0 = w0 / (p * sigma);
    const double decay = std::exp(-2.0 * sigma * thickness);
    // cosh/sinh with the common factor exp(sigma h) moved into log_scale
    const double v1 = 0.5 * ((v0 + y0) + (v0 - y0) * decay);
    const double y1 = 0.5 * ((v0 + y0) - (v0 - y0) * decay);
    out.crossings += sign_change_zero(v0, v1, count_far_end);
    out.v = v1;
    out.flux = p * sigma * y1;
    out.log_scale += sigma * thickness;
  } else {
    const double v1 = v0 + w0 / p * thickness;
    out.crossings += sign_change_zero(v0, v1, count_far_end);
    out.v = v1;
    out.flux = w0;
  }
  renormalize(out);
  return out;
}

Dispersion dispersion_and_count(const LayerStack& stack, double kappa, double lambda,
                                BasisWeight weight) {
  TransferState s;  // (0, 1) at z = -H
  const std::size_t n = stack.layer_count();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    // zeros exactly at z = 0 are not interior
    s = propagate_layer(s, stack.layer(j), stack.thickness(j), kappa, lambda, weight, j != 0);
  }
  return {s.v, s.crossings, s.log_scale};
}

// ---------------------------------------------------------------------------
// Layer pieces

LayerPiece::Kind piece_kind(double s, double thickness) {
  if (s < 0.0) return LayerPiece::Kind::trig;
  if (s > 0.0) {
    return std::sqrt(s) * thickness <= 2.0 ? LayerPiece::Kind::hyperbolic
                                           : LayerPiece::Kind::exponential;
  }
  return LayerPiece::Kind::affine;
}

void LayerPiece::basis(double z, double f[2], double df[2]) const {
  const double t = z - mid();
  switch (kind) {
    case Kind::trig: {
      const double c = std::cos(rate * t), s = std::sin(rate * t);
      f[0] = c;
      f[1] = s;
      df[0] = -rate * s;
      df[1] = rate * c;
      break;
    }
    case Kind::hyperbolic: {
      const double c = std::cosh(rate * t), s = std::sinh(rate * t);
      f[0] = c;
      f[1] = s;
      df[0] = rate * s;
      df[1] = rate * c;
      break;
    }
    case Kind::exponential: {
      const double e1 = std::exp(rate * (z - top));
      const double e2 = std::exp(-rate * (z - bottom));
      f[0] = e1;
      f[1] = e2;
      df[0] = rate * e1;
      df[1] = -rate * e2;
      break;
    }
    case Kind::affine:
      f[0] = 1.0;
      f[1] = t;
      df[0] = 0.0;
      df[1] = 1.0;
      break;
  }
}

double LayerPiece::value(double z) const {
  double f[2]{}, df[2]{};
  basis(z, f, df);
  return a * f[0] + b * f[1];
}

double LayerPiece::derivative(double z) const {
  double f[2]{}, df[2]{};
  basis(z, f, df);
  return a * df[0] + b * df[1];
}

std::array<double, 3> LayerPiece::basis_gram() const {
  const double h = top - bottom;
  const double r = rate;
  switch (kind) {
    case Kind::trig: {
      const double x = r * h;
      return {0.5 * h + std::sin(x) / (2.0 * r), 0.0, x_minus_sin(x) / (2.0 * r)};
    }
    case Kind::hyperbolic: {
      const double x = r * h;
      return {0.5 * h + std::sinh(x) / (2.0 * r), 0.0, sinh_minus_x(x) / (2.0 * r)};
    }
    case Kind::exponential: {
      const double self = -std::expm1(-2.0 * r * h) / (2.0 * r);
      return {self, h * std::exp(-r * h), self};
    }
    case Kind::affine:
      return {h, 0.0, h * h * h / 12.0};
  }
  return {0.0, 0.0, 0.0};
}

double LayerPiece::integral_product(const LayerPiece& other) const {
  const auto g = basis_gram();
  return a * other.a * g[0] + (a * other.b + b * other.a) * g[1] + b * other.b * g[2];
}

std::size_t Eigenfunction::layer_at(double z) const {
  for (std::size_t j = 0; j + 1 < pieces_.size(); ++j) {
    if (z > pieces_[j].bottom) return j;
  }
  return pieces_.size() - 1;
}

double Eigenfunction::value(double z) const { return pieces_[layer_at(z)].value(z); }
double Eigenfunction::derivative(double z) const { return pieces_[layer_at(z)].derivative(z); }
double Eigenfunction::flux(double z) const {
  const auto& piece = pieces_[layer_at(z)];
  return piece.p * piece.derivative(z);
}

Traces VerticalBasis::traces(std::span<const double> nodes,
                             std::span<const std::size_t> node_layers) const {
  Traces t;
  t.nodes = nodes.size();
  t.modes = size();
  t.values.resize(t.nodes * t.modes);
  t.derivatives.resize(t.nodes * t.modes);
  for (std::size_t q = 0; q < t.nodes; ++q) {
    for (std::size_t k = 0; k < t.modes; ++k) {
      const auto& piece = functions_[k].pieces()[node_layers[q]];
      double f[2]{}, df[2]{};
      piece.basis(nodes[q], f, df);
      t.values[q * t.modes + k] = piece.a * f[0] + piece.b * f[1];
      t.derivatives[q * t.modes + k] = piece.a * df[0] + piece.b * df[1];
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Eigenpairs

namespace {

// Null space of the global matching system at an eigenvalue: two unknowns
// per layer, Dirichlet rows at both ends, value and flux rows per interface.
// `multiplicity` > 1 handles eigenvalues closer than double spacing (layers
// decoupled by strongly evanescent ones); the returned functions are then
// orthonormalized among themselves.
std::vector<Eigenfunction> build_eigenfunctions(const LayerStack& stack, double kappa,
                                                double lambda, BasisWeight weight,
                                                int first_index, int multiplicity) {
  const std::size_t n = stack.layer_count();
  std::vector<LayerPiece> pieces(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& prm = stack.layer(j);
    const double p = prm.bD();
    const double s = squared_rate(kappa, lambda, p, layer_weight(prm, weight));
    LayerPiece& piece = pieces[j];
    piece.kind = piece_kind(s, stack.thickness(j));
    piece.rate = std::sqrt(std::abs(s));
    piece.top = stack.top(j);
    piece.bottom = stack.bottom(j);
    piece.p = p;
  }

  const Eigen::Index dim = static_cast<Eigen::Index>(2 * n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  double f[2]{}, df[2]{};
  Eigen::Index row = 0;

  pieces[n - 1].basis(pieces[n - 1].bottom, f, df);
  m(row, 2 * (n - 1)) = f[0];
  m(row, 2 * (n - 1) + 1) = f[1];
  ++row;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& up = pieces[i - 1];
    const auto& down = pieces[i];
    double fu[2]{}, dfu[2]{}, fd[2]{}, dfd[2]{};
    up.basis(up.bottom, fu, dfu);
    down.basis(down.top, fd, dfd);
    const auto cu = static_cast<Eigen::Index>(2 * (i - 1));
    const auto cd = static_cast<Eigen::Index>(2 * i);
    m(row, cu) = fu[0];
    m(row, cu + 1) = fu[1];
    m(row, cd) = -fd[0];
    m(row, cd + 1) = -fd[1];
    ++row;
    m(row, cu) = up.p * dfu[0];
    m(row, cu + 1) = up.p * dfu[1];
    m(row, cd) = -down.p * dfd[0];
    m(row, cd + 1) = -down.p * dfd[1];
    const double rmax = m.row(row).cwiseAbs().maxCoeff();
    if (rmax > 0.0) m.row(row) /= rmax;
    ++row;
  }
  pieces[0].basis(pieces[0].top, f, df);
  m(row, 0) = f[0];
  m(row, 1) = f[1];

  // the per-layer bases are bounded by ~1.6, so columns need no scaling
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);

  auto inner = [&](const std::vector<LayerPiece>& u, const std::vector<LayerPiece>& v) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += layer_weight(stack.layer(j), weight) * u[j].integral_product(v[j]);
    }
    return sum;
  };

  std::vector<std::vector<LayerPiece>> found;
  for (int c = 0; c < multiplicity; ++c) {
    const Eigen::VectorXd null = svd.matrixV().col(dim - multiplicity + c);
    std::vector<LayerPiece> cur = pieces;
    for (std::size_t j = 0; j < n; ++j) {
      cur[j].a = null(static_cast<Eigen::Index>(2 * j));
      cur[j].b = null(static_cast<Eigen::Index>(2 * j + 1));
    }
    // two passes of Gram-Schmidt against the functions already accepted
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& prev : found) {
        const double proj = inner(cur, prev);
        for (std::size_t j = 0; j < n; ++j) {
          cur[j].a -= proj * prev[j].a;
          cur[j].b -= proj * prev[j].b;
        }
      }
    }
    const double scale = 1.0 / std::sqrt(inner(cur, cur));
    for (auto& piece : cur) {
      piece.a *= scale;
      piece.b *= scale;
    }
    found.push_back(std::move(cur));
  }

  std::vector<Eigenfunction> out;
  for (int c = 0; c < multiplicity; ++c) {
    auto& cur = found[c];
    const auto& bot = cur[n - 1];
    const auto& top = cur[0];
    const double flux_bottom = bot.p * bot.derivative(bot.bottom);
    const double flux_top = top.p * top.derivative(top.top);
    const double biggest = std::max(std::abs(flux_bottom), std::abs(flux_top));
    double sign = 1.0;
    if (std::abs(flux_bottom) >= 1e-6 * biggest) {
      sign = sign_of(flux_bottom);
    } else {
      // bottom flux underflowed: the k-th mode has k-1 interior zeros, so with
      // a positive bottom slope the top slope has sign (-1)^k
      const double expected = ((first_index + c) % 2 == 0) ? 1.0 : -1.0;
      sign = sign_of(flux_top) * expected;
    }
    for (auto& piece : cur) {
      piece.a *= sign;
      piece.b *= sign;
    }
    out.emplace_back(std::move(cur));
  }
  return out;
}

}  // namespace

VerticalBasis find_eigenpairs(const LayerStack& stack, double kappa, int kmax, BasisWeight weight) {
  if (kmax < 1) throw ConfigError("find_eigenpairs: Kmax must be >= 1");
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0, max_p = 0.0;
  double min_rho = std::numeric_limits<double>::infinity();
  for (const auto& prm : stack.layers()) {
    const double rho = layer_weight(prm, weight);
    min_ratio = std::min(min_ratio, prm.bD() / rho);
    max_ratio = std::max(max_ratio, prm.bD() / rho);
    max_p = std::max(max_p, prm.bD());
    min_rho = std::min(min_rho, rho);
  }
  const double H = stack.depth();
  auto count = [&](double lam) { return dispersion_and_count(stack, kappa, lam, weight).count; };

  std::vector<double> eigenvalues;
  std::vector<Eigenfunction> functions;
  // every eigenvalue exceeds min(p / rho) kappa^2 by the Rayleigh quotient
  double lo = min_ratio * kappa * kappa;
  long n_lo = count(lo);
  if (n_lo != 0) throw EigenSolveError("eigenvalue below the Rayleigh lower bound", 0.0, lo);

  for (int k = 1; k <= kmax; ++k) {
    // comparison with the largest coefficients bounds lambda_k from above
    const double kk = k * kPi / H;
    double hi = 1.0000001 * (max_ratio * kappa * kappa + max_p / min_rho * kk * kk) + 1e-300;
    long n_hi = count(hi);
    for (int grow = 0; n_hi < k && grow < 200; ++grow) {
      hi *= 2.0;
      n_hi = count(hi);
    }
    if (n_hi < k) throw EigenSolveError("no upper bracket for eigenvalue " + std::to_string(k), lo, hi);

    int iter = 0;
    bool unsplittable = false;
    while (!(n_lo == k - 1 && n_hi == k)) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) {
        unsplittable = true;
        break;
      }
      if (++iter > 2200) {
        throw EigenSolveError("could not isolate eigenvalue " + std::to_string(k), lo, hi);
      }
      const long n_mid = count(mid);
      if (n_mid >= k) {
        hi = mid;
        n_hi = n_mid;
      } else {
        lo = mid;
        n_lo = n_mid;
      }
    }
    if (unsplittable) {
      if (n_lo != k - 1) {
        throw EigenSolveError("could not isolate eigenvalue " + std::to_string(k), lo, hi);
      }
      // several eigenvalues between adjacent doubles
      const int mult = static_cast<int>(std::min<long>(n_hi - n_lo, kmax - k + 1));
      eigenvalues.insert(eigenvalues.end(), mult, hi);
      k += mult - 1;
      lo = hi;
      n_lo = n_hi;
      continue;
    }

    Dispersion d_lo = dispersion_and_count(stack, kappa, lo, weight);
    Dispersion d_hi = dispersion_and_count(stack, kappa, hi, weight);
    // keep the log-scale spread small so the continuous dispersion value
    // F exp(log_scale - ref) stays representable across the bracket
    for (int it = 0; std::abs(d_hi.log_scale - d_lo.log_scale) > 40.0 && it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Dispersion d_mid = dispersion_and_count(stack, kappa, mid, weight);
      if (d_mid.count >= k) {
        hi = mid;
        d_hi = d_mid;
      } else {
        lo = mid;
        d_lo = d_mid;
      }
    }
    const double ref = d_lo.log_scale;
    auto G = [&](double lam) {
      const Dispersion d = dispersion_and_count(stack, kappa, lam, weight);
      return d.F * std::exp(d.log_scale - ref);
    };
    const double g_lo = d_lo.F;
    const double g_hi = d_hi.F * std::exp(d_hi.log_scale - ref);

    double lambda = 0.0;
    if (g_lo == 0.0) {
      lambda = lo;
    } else if (g_hi == 0.0) {
      lambda = hi;
    } else if ((g_lo < 0.0) == (g_hi < 0.0)) {
      // the terminal value lost its sign change to rounding (a near-double
      // root); the count still isolates the eigenvalue, so bisect to the end
      double a = lo, b = hi;
      for (;;) {
        const double mid = 0.5 * (a + b);
        if (!(mid > a && mid < b)) break;
        if (count(mid) >= k) {
          b = mid;
        } else {
          a = mid;
        }
      }
      lambda = b;
    } else {
      std::uintmax_t max_iter = 200;
      boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
      const auto root = boost::math::tools::toms748_solve(G, lo, hi, g_lo, g_hi, tol, max_iter);
      if (max_iter >= 200) {
        throw EigenSolveError("root refinement did not converge for eigenvalue " + std::to_string(k),
                              root.first, root.second);
      }
      lambda = 0.5 * (root.first + root.second);
    }
    eigenvalues.push_back(lambda);
    lo = hi;
    n_lo = n_hi;
  }

  // Eigenvalues closer than this share one null-space computation; apart
  // from such groups each function comes from its own null vector.
  constexpr double kClusterGap = 1e-8;
  for (std::size_t first = 0; first < eigenvalues.size();) {
    std::size_t last = first + 1;
    while (last < eigenvalues.size() &&
           eigenvalues[last] - eigenvalues[last - 1] <= kClusterGap * eigenvalues[last]) {
      ++last;
    }
    double mean = 0.0;
    for (std::size_t i = first; i < last; ++i) mean += eigenvalues[i];
    mean /= static_cast<double>(last - first);
    auto fns = build_eigenfunctions(stack, kappa, mean, weight, static_cast<int>(first) + 1,
                                    static_cast<int>(last - first));
    for (auto& fn : fns) functions.push_back(std::move(fn));
    first = last;
  }
  return VerticalBasis(kappa, weight, std::move(eigenvalues), std::move(functions));
}

// ---------------------------------------------------------------------------
// P1 finite-element oracle

namespace {

std::vector<double> fem_eigs_on_nodes(const LayerStack& stack, double kappa, int kmax,
                                      const std::vector<double>& nodes, BasisWeight weight) {
  using real = long double;
  const std::size_t n_el = nodes.size() - 1;
  if (n_el < 2) throw ConfigError("fem_oracle_eigs: mesh too coarse");
  const std::size_t n_int = n_el - 1;  // interior nodes after Dirichlet ends
  if (static_cast<std::size_t>(kmax) > n_int) throw ConfigError("fem_oracle_eigs: Kmax exceeds mesh size");

  // tridiagonal stiffness (a_diag, a_off) and consistent mass (m_diag, m_off)
  std::vector<real> a_diag(n_el + 1, 0.0L), m_diag(n_el + 1, 0.0L);
  std::vector<real> a_off(n_el, 0.0L), m_off(n_el, 0.0L);
  const real kk = static_cast<real>(kappa) * kappa;
  for (std::size_t e = 0; e < n_el; ++e) {
    const real za = nodes[e], zb = nodes[e + 1];
    const real h = zb - za;
    const auto& prm = stack.material_at(static_cast<double>(0.5L * (za + zb)));
    const real p = prm.bD();
    const real rho = layer_weight(prm, weight);
    const real k_diag = p / h + p * kk * h / 3.0L;
    const real k_off = -p / h + p * kk * h / 6.0L;
    a_diag[e] += k_diag;
    a_diag[e + 1] += k_diag;
    a_off[e] += k_off;
    m_diag[e] += rho * h / 3.0L;
    m_diag[e + 1] += rho * h / 3.0L;
    m_off[e] += rho * h / 6.0L;
  }

  // Sylvester inertia of (A - lam M) on interior nodes 1..n_el-1
  auto count_below = [&](real lam) {
    long negatives = 0;
    real d = 1.0L;
    for (std::size_t i = 1; i <= n_int; ++i) {
      real diag = a_diag[i] - lam * m_diag[i];
      if (i > 1) {
        const real off = a_off[i - 1] - lam * m_off[i - 1];
        diag -= off * off / d;
      }
      if (diag == 0.0L) diag = -std::numeric_limits<real>::min();
      if (diag < 0.0L) ++negatives;
      d = diag;
    }
    return negatives;
  };

  std::vector<double> out;
  real lo = 0.0L;
  for (int k = 1; k <= kmax; ++k) {
    real hi = lo > 0.0L ? 2.0L * lo : 1.0L;
    while (count_below(hi) < k) hi *= 2.0L;
    real a = lo, b = hi;
    for (int it = 0; it < 200; ++it) {
      const real mid = 0.5L * (a + b);
      if (mid <= a || mid >= b) break;
      if (count_below(mid) >= k) {
        b = mid;
      } else {
        a = mid;
      }
    }
    out.push_back(static_cast<double>(0.5L * (a + b)));
    lo = a;
  }
  return out;
}

}  // namespace

std::vector<double> fem_oracle_eigs(const LayerStack& stack, double kappa, int kmax,
                                    double mesh_density, BasisWeight weight) {
  if (!(mesh_density > 0.0)) throw ConfigError("fem_oracle_eigs: mesh density must be positive");
  std::vector<double> nodes;
  const std::size_t n = stack.layer_count();
  nodes.push_back(stack.bottom(n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    const double h = stack.thickness(j);
    const auto elems = static_cast<std::size_t>(std::max(1.0, std::ceil(mesh_density * h - 1e-9)));
    for (std::size_t e = 1; e <= elems; ++e) {
      nodes.push_back(e == elems ? stack.top(j) : stack.bottom(j) + h * static_cast<double>(e) / elems);
    }
  }
  return fem_eigs_on_nodes(stack, kappa, kmax, nodes, weight);
}

std::vector<double> fem_oracle_eigs(const LayerStack& stack, double kappa, int kmax,
                                    std::vector<double> nodes, BasisWeight weight) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  const double tol = 1e-12 * stack.depth();
  auto has_node = [&](double z) {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), z - tol);
    return it != nodes.end() && std::abs(*it - z) <= tol;
  };
  for (double z : stack.interfaces()) {
    if (!has_node(z)) {
      throw ConfigError("fem_oracle_eigs: mesh not aligned with interface z = " + format_double(z));
    }
  }
  if (nodes.front() < -stack.depth() - tol || nodes.back() > tol) {
    throw ConfigError("fem_oracle_eigs: mesh extends outside [-H, 0]");
  }
  // snap to the exact interface values
  for (double z : stack.interfaces()) {
    *std::lower_bound(nodes.begin(), nodes.end(), z - tol) = z;
  }
  return fem_eigs_on_nodes(stack, kappa, kmax, nodes, weight);
}

}  // namespace layercon

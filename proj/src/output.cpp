#include "layercon/output.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "layercon/text.hpp"

namespace layercon {

namespace {

void write_column(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) out << format_double(x) << '\n';
}

}  // namespace

void write_vtk(std::ostream& out, const FlowState& state, const DarcyModel& model) {
  const Grid& g = model.space().grid();
  const std::size_t nx = static_cast<std::size_t>(g.nx());
  out << "# vtk DataFile Version 3.0\n";
  out << "layercon t=" << format_double(state.t) << " step=" << state.step << '\n';
  out << "ASCII\nDATASET RECTILINEAR_GRID\n";
  out << "DIMENSIONS " << nx << " 1 " << g.nz() << '\n';
  out << "X_COORDINATES " << nx << " double\n";
  std::vector<double> x(nx);
  for (std::size_t i = 0; i < nx; ++i) x[i] = g.x(i);
  write_column(out, x);
  out << "Y_COORDINATES 1 double\n0\n";
  out << "Z_COORDINATES " << g.nz() << " double\n";
  write_column(out, g.z());
  out << "POINT_DATA " << g.size() << '\n';
  const std::pair<const char*, std::vector<double>> fields[] = {
      {"phi", model.total_phi_nodal(state)},
      {"u_x", state.ux},
      {"u_z", state.uz},
      {"P", model.pressure_nodal(state.pressure)},
  };
  for (const auto& [name, data] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    write_column(out, data);
  }
}

void write_spectrum_csv(std::ostream& out, const SpectralSpace& space) {
  out << "m,kappa,k,lambda\n";
  for (std::size_t m = 0; m < space.modes(); ++m) {
    const VerticalBasis& b = space.basis(m);
    for (std::size_t k = 0; k < b.size(); ++k) {
      out << m << ',' << format_double(b.kappa()) << ',' << k + 1 << ',' << format_double(b.eigenvalue(k))
          << '\n';
    }
  }
}

void write_eigenfunctions_csv(std::ostream& out, const SpectralSpace& space, std::size_t m) {
  const Grid& g = space.grid();
  const Traces& t = space.traces(m);
  out << "z,layer";
  for (std::size_t k = 0; k < t.modes; ++k) out << ",v_" << k + 1;
  out << '\n';
  for (std::size_t q = 0; q < g.nz(); ++q) {
    out << format_double(g.z()[q]) << ',' << g.node_layers()[q];
    for (std::size_t k = 0; k < t.modes; ++k) out << ',' << format_double(t.value(q, k));
    out << '\n';
  }
}

void write_steady_csv(std::ostream& out, const LayerStack& stack, const ConductionLift& lift) {
  const double H = stack.depth();
  std::vector<double> z;
  for (int i = 0; i <= 64; ++i) z.push_back(-H * i / 64.0);
  // the top is exactly 0 and the bottom exactly -H
  z.back() = stack.interface(stack.layer_count());
  for (std::size_t j = 1; j < stack.layer_count(); ++j) z.push_back(stack.interface(j));
  std::sort(z.begin(), z.end(), std::greater<>());
  z.erase(std::unique(z.begin(), z.end()), z.end());

  out << "z,layer,phi,flux,kind\n";
  for (double zz : z) {
    const std::size_t j = stack.layer_index_at(zz);
    const char* kind = "interior";
    if (zz == 0.0 || zz == stack.interface(stack.layer_count())) {
      kind = "boundary";
    } else {
      for (std::size_t i = 1; i < stack.layer_count(); ++i)
        if (zz == stack.interface(i)) kind = "interface";
    }
    const double flux = -stack.layer(j).bD() * lift.slope(j);
    out << format_double(zz) << ',' << j << ',' << format_double(lift.value_in_layer(j, zz)) << ','
        << format_double(flux) << ',' << kind << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace layercon

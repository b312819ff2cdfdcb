#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "layercon/darcy_transport.hpp"

namespace layercon {

/// Legacy ASCII VTK rectilinear grid: x the uniform grid, z the vertical
/// quadrature nodes (ascending), point data phi (total concentration),
/// u_x, u_z and P.
void write_vtk(std::ostream& out, const FlowState& state, const DarcyModel& model);

/// Columns m, kappa, k, lambda (k counted from 1) for every stored mode.
void write_spectrum_csv(std::ostream& out, const SpectralSpace& space);

/// Columns z, layer, v_1 .. v_K of horizontal mode m at the grid nodes.
void write_eigenfunctions_csv(std::ostream& out, const SpectralSpace& space, std::size_t m);

/// Conduction profile: columns z, layer, phi, flux, kind. Rows run from the
/// top down over 64 uniform intervals plus every interface; kind is one of
/// boundary, interface, interior. Interface rows use the layer below.
void write_steady_csv(std::ostream& out, const LayerStack& stack, const ConductionLift& lift);

/// Writes to a file, creating parent directories. Throws std::runtime_error
/// on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace layercon

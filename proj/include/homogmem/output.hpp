#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "homogmem/macro.hpp"
#include "homogmem/mesh.hpp"

namespace homogmem {

/// Legacy ASCII VTK unstructured grid with one point scalar field.
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> values,
               const std::string& name = "u");

/// Columns x1,x2,value, one row per vertex.
void write_field_csv(const std::filesystem::path& path, const TriMesh& mesh, std::span<const double> values);

/// Columns n,t,energy,l2_norm.
void write_energy_csv(const std::filesystem::path& path, std::span<const EnergyRecord> series);

}  // namespace homogmem

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "handact/mesh/mesh.hpp"

namespace handact::mesh {

enum class MeshFormat { Off, Obj };

/// Guesses the format from the file extension.
std::optional<MeshFormat> format_from_path(const std::filesystem::path& path);

/// Parsers report ParseError with the offending line number, then validate().
TriangleMesh read_off(std::istream& in);
TriangleMesh read_obj(std::istream& in);
TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);

/// By default coordinates are written in shortest round-trip form so a reload
/// is exact; decimals >= 0 writes fixed notation instead (smaller files).
void write_off(std::ostream& out, const TriangleMesh& mesh, int decimals = -1);
void save_off(const std::filesystem::path& path, const TriangleMesh& mesh, int decimals = -1);

}  // namespace handact::mesh

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "placekit/geometry.hpp"
#include "placekit/scene.hpp"

namespace placekit {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

// Parses ASCII or binary little-endian PLY. Vertex positions are required;
// uchar or floating point red/green/blue are optional. Polygons are fan
// triangulated. A file without a face element yields an empty triangle
// list. Throws ParseError with the byte offset of the problem.
TriangleMesh parse_ply(std::string_view bytes);

std::string format_ply(const TriangleMesh& mesh, PlyFormat format = PlyFormat::kBinaryLittleEndian);

TriangleMesh read_ply(const std::filesystem::path& file);
void write_ply(const std::filesystem::path& file, const TriangleMesh& mesh,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

PointCloud read_point_ply(const std::filesystem::path& file);
void write_point_ply(const std::filesystem::path& file, const PointCloud& points);

// Whole-file helpers; throw IoError.
std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view bytes);

}  // namespace placekit

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tofskin/types.hpp"

namespace tofskin {

// Indexed triangle surface. Positions are meters. Normals are derived; call
// compute_normals after editing vertices or triangles.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Eigen::Vector3i> triangles;
  std::vector<Vec3> face_normals;    // unit, per triangle
  std::vector<Vec3> vertex_normals;  // area-weighted, unit
};

struct LoadReport {
  std::size_t degenerate_dropped = 0;
  std::size_t vertices_merged = 0;
};

// Reads ASCII OBJ (v/f records, polygons fanned) or binary STL. Degenerate
// triangles (area < 1e-12 m^2) are dropped; STL vertices are welded on exact
// coordinate match. STL written by this tool carries a "units=mm" header tag
// and is converted back to meters; other STL files are read as-is.
TriMesh load_mesh(const std::filesystem::path& path, LoadReport* report = nullptr);

// Binary STL in millimeters (print convention). The 80-byte header carries
// `header_note` prefixed with the tool name and a units=mm tag.
void save_stl(const TriMesh& mesh, const std::filesystem::path& path,
              const std::string& header_note = {});

// ASCII PLY in meters with optional header comment lines.
void save_ply(const TriMesh& mesh, const std::filesystem::path& path,
              const std::vector<std::string>& comments = {});

void compute_normals(TriMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriMesh& mesh);

// Divergence-theorem volume; meaningful for watertight, outward-oriented
// meshes (cavities contribute negatively).
double signed_volume(const TriMesh& mesh);

// Every edge shared by exactly two triangles.
bool is_watertight(const TriMesh& mesh);

// Every interior edge traversed once in each direction.
bool has_consistent_winding(const TriMesh& mesh);

Eigen::AlignedBox3d bounding_box(const TriMesh& mesh);
double mean_edge_length(const TriMesh& mesh);

// Drops triangles with area below `min_area` or with repeated vertex indices.
std::size_t drop_degenerate_triangles(TriMesh& mesh, double min_area = 1e-12);

}  // namespace tofskin

#pragma once

#include <cstddef>
#include <vector>

#include "tofskin/mesh.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

// Regular signed-distance grid sampled at voxel centers; negative inside.
struct SdfGrid {
  Vec3 origin = Vec3::Zero();  // position of voxel center (0,0,0)
  double voxel_size = 0.0;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<float> values;  // x-fastest

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims.x()) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims.y()) * k);
  }
  float at(int i, int j, int k) const { return values[index(i, j, k)]; }
  float& at(int i, int j, int k) { return values[index(i, j, k)]; }
  Vec3 center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i, j, k);
  }
};

struct OrientedBox {
  Pose pose;
  Vec3 extents = Vec3::Zero();  // full side lengths, box frame
};

// Signed distance from p to the box surface (negative inside).
double box_sdf(const OrientedBox& box, const Vec3& p);

struct VoxelizeOptions {
  int padding = 2;                       // voxels around the mesh bounds
  std::size_t max_voxels = 256'000'000;  // memory budget (~1 GiB of floats)
  int threads = 0;                       // 0 = hardware concurrency
};

// Exact nearest-triangle distance at every voxel center, signed by scanline
// parity along +x. Requires a watertight mesh.
SdfGrid voxelize_sdf(const TriMesh& mesh, double voxel_size,
                     const VoxelizeOptions& options = {});

struct CsgReport {
  std::vector<std::size_t> skipped_outside;  // cutters entirely outside the grid
};

// CSG difference: value' = max(value, -box_sdf) per voxel per cutter.
SdfGrid csg_subtract(SdfGrid grid, const std::vector<OrientedBox>& cutters,
                     CsgReport* report = nullptr);

// Zero-isosurface triangulation over a consistent 6-tetrahedra decomposition
// of each cell; watertight when the surface closes inside the grid, oriented
// with normals toward positive (outside) values.
TriMesh extract_surface(const SdfGrid& grid);

// Solid volume with first-order fractional coverage of boundary voxels.
double solid_volume(const SdfGrid& grid);

// Plain negative-voxel count times voxel volume.
double negative_voxel_volume(const SdfGrid& grid);

}  // namespace tofskin

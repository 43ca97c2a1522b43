#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tofskin/mesh.hpp"
#include "tofskin/sdf.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

struct SkinParams {
  double gap = 0.0;          // clearance between link surface and shell inner wall
  double thickness = 0.005;  // shell wall thickness
  std::optional<std::vector<int>> region;  // face indices; empty optional = whole mesh
};

// Oriented bounding box of a sensor PCB plus per-side clearance.
struct PcbFootprint {
  double width = 0.0;
  double height = 0.0;
  double depth = 0.0;
  double clearance = 0.0;
};

struct OffsetShellResult {
  TriMesh mesh;  // faces ordered outer | inner | walls
  std::size_t outer_faces = 0;
  std::size_t inner_faces = 0;
  std::size_t wall_faces = 0;
  // Non-adjacent face pairs of the output that intersect; the offset folded
  // over itself (concave region tighter than gap+thickness). The shell is
  // still returned.
  std::vector<std::pair<int, int>> self_intersections;
};

// Closed solid between offsets of the region at distance gap (inner) and
// gap+thickness (outer) along area-weighted region vertex normals; open
// region boundaries are sealed with side walls.
OffsetShellResult offset_shell(const TriMesh& mesh, const SkinParams& params);

// Cutter box for one PCB pocket: the footprint grown by clearance per side,
// sunk depth-first into the surface so the nominal board top sits flush with
// the mount origin.
OrientedBox pcb_cutter(const PcbFootprint& pcb, const Pose& mount);

// All intersecting non-adjacent triangle pairs (uniform-grid broad phase,
// exact triangle-triangle narrow phase).
std::vector<std::pair<int, int>> find_self_intersections(const TriMesh& mesh);

}  // namespace tofskin

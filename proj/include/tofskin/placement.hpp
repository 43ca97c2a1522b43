#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tofskin/mesh.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

struct PlacementConfig {
  double min_separation = 0.045;  // meters, Euclidean
  std::uint64_t seed = 0;
  int max_attempts = 10000;  // consecutive rejected darts before stopping
};

struct SurfaceSample {
  Vec3 position;
  Vec3 normal;  // face normal of face_index, outward
  int face_index = -1;
};

// Poisson-disk dart throwing: faces picked area-uniformly, rejections
// against accepted samples on a hash grid. Deterministic for a fixed seed.
// Stops after max_attempts consecutive rejections.
std::vector<SurfaceSample> sample_poisson(const TriMesh& mesh, std::span<const int> region,
                                          const PlacementConfig& cfg);

// Tangent frame at a sample: z = normal, x from the global axis least aligned
// with the normal (ties prefer X, then Y, then Z), y = z cross x.
Pose mount_frame(const SurfaceSample& sample);

}  // namespace tofskin

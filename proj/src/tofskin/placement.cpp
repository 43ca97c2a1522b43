#include "tofskin/placement.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tofskin/errors.hpp"
#include "tofskin/rng.hpp"

namespace tofskin {

namespace {

struct CellKey {
  int x, y, z;
  bool operator==(const CellKey&) const = default;
};
struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return (static_cast<std::size_t>(k.x) * 73856093u) ^
           (static_cast<std::size_t>(k.y) * 19349663u) ^
           (static_cast<std::size_t>(k.z) * 83492791u);
  }
};

}  // namespace

std::vector<SurfaceSample> sample_poisson(const TriMesh& mesh, std::span<const int> region,
                                          const PlacementConfig& cfg) {
  if (cfg.min_separation <= 0.0) throw ValidationError("min_separation must be positive");
  if (cfg.max_attempts < 1) throw ValidationError("max_attempts must be at least 1");
  if (region.empty()) throw ValidationError("sample_poisson: empty region");
  for (int f : region)
    if (f < 0 || f >= static_cast<int>(mesh.triangles.size()))
      throw ValidationError("sample_poisson: region face index out of range");

  // Cumulative areas for area-uniform face selection.
  std::vector<double> cumulative(region.size());
  double total = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i) {
    const auto& t = mesh.triangles[region[i]];
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative[i] = total;
  }
  if (total <= 0.0) throw ValidationError("sample_poisson: region has zero area");

  const double r = cfg.min_separation;
  const double r2 = r * r;
  const double cell = r;
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid;
  auto key_of = [&](const Vec3& p) {
    return CellKey{static_cast<int>(std::floor(p.x() / cell)),
                   static_cast<int>(std::floor(p.y() / cell)),
                   static_cast<int>(std::floor(p.z() / cell))};
  };

  std::vector<SurfaceSample> samples;
  auto far_enough = [&](const Vec3& p) {
    const CellKey k = key_of(p);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          auto it = grid.find(CellKey{k.x + dx, k.y + dy, k.z + dz});
          if (it == grid.end()) continue;
          for (int s : it->second)
            if ((samples[s].position - p).squaredNorm() < r2) return false;
        }
    return true;
  };

  Rng rng(cfg.seed);
  int consecutive_rejections = 0;
  while (consecutive_rejections < cfg.max_attempts) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), pick);
    const std::size_t ri = std::min(static_cast<std::size_t>(it - cumulative.begin()),
                                    region.size() - 1);
    const int face = region[ri];
    const auto& t = mesh.triangles[face];

    // uniform barycentric point
    const double su = std::sqrt(rng.uniform());
    const double v = rng.uniform();
    const Vec3 p = (1.0 - su) * mesh.vertices[t[0]] + su * (1.0 - v) * mesh.vertices[t[1]] +
                   su * v * mesh.vertices[t[2]];

    if (!far_enough(p)) {
      ++consecutive_rejections;
      continue;
    }
    consecutive_rejections = 0;
    grid[key_of(p)].push_back(static_cast<int>(samples.size()));
    samples.push_back({p, mesh.face_normals[face], face});
  }
  return samples;
}

Pose mount_frame(const SurfaceSample& sample) {
  const Vec3 z = sample.normal.normalized();
  int least = 0;
  double best = std::abs(z.x());
  if (std::abs(z.y()) < best) {
    best = std::abs(z.y());
    least = 1;
  }
  if (std::abs(z.z()) < best) least = 2;
  const Vec3 seed = Vec3::Unit(least);
  const Vec3 x = (seed - seed.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Pose pose;
  pose.rotation.col(0) = x;
  pose.rotation.col(1) = y;
  pose.rotation.col(2) = z;
  pose.translation = sample.position;
  return pose;
}

}  // namespace tofskin

#include "tofskin/sdf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "tofskin/bvh.hpp"
#include "tofskin/errors.hpp"

namespace tofskin {

double box_sdf(const OrientedBox& box, const Vec3& p) {
  const Vec3 local = box.pose.rotation.transpose() * (p - box.pose.translation);
  const Vec3 q = local.cwiseAbs() - 0.5 * box.extents;
  const Vec3 outside = q.cwiseMax(0.0);
  return outside.norm() + std::min(q.maxCoeff(), 0.0);
}

namespace {

// One triangle prepared for scanline parity tests: the (y,z) projection with
// CCW winding plus the supporting plane. n.x equals the projected signed area,
// so covered triangles always have a usable x solve.
struct ProjTri {
  double ay, az, by, bz, cy, cz;
  Vec3 n;
  double d;
};

inline bool edge_counts(double dy, double dz) {
  return dz > 0.0 || (dz == 0.0 && dy < 0.0);
}

inline bool covers(const ProjTri& t, double y, double z) {
  const double e0 = (t.by - t.ay) * (z - t.az) - (t.bz - t.az) * (y - t.ay);
  if (e0 < 0.0 || (e0 == 0.0 && !edge_counts(t.by - t.ay, t.bz - t.az))) return false;
  const double e1 = (t.cy - t.by) * (z - t.bz) - (t.cz - t.bz) * (y - t.by);
  if (e1 < 0.0 || (e1 == 0.0 && !edge_counts(t.cy - t.by, t.cz - t.bz))) return false;
  const double e2 = (t.ay - t.cy) * (z - t.cz) - (t.az - t.cz) * (y - t.cy);
  if (e2 < 0.0 || (e2 == 0.0 && !edge_counts(t.ay - t.cy, t.az - t.cz))) return false;
  return true;
}

}  // namespace

SdfGrid voxelize_sdf(const TriMesh& mesh, double voxel_size, const VoxelizeOptions& options) {
  if (voxel_size <= 0.0) throw ValidationError("voxel_size must be positive");
  if (!is_watertight(mesh)) throw ValidationError("voxelize_sdf requires a watertight mesh");

  const auto box = bounding_box(mesh);
  const double h = voxel_size;
  const int pad = std::max(1, options.padding);

  SdfGrid grid;
  grid.voxel_size = h;
  grid.origin = box.min() - pad * h * Vec3::Ones();
  for (int a = 0; a < 3; ++a)
    grid.dims[a] = static_cast<int>(std::ceil(box.sizes()[a] / h)) + 2 * pad + 1;
  const std::size_t total = static_cast<std::size_t>(grid.dims.x()) * grid.dims.y() *
                            static_cast<std::size_t>(grid.dims.z());
  if (total > options.max_voxels)
    throw ValidationError("voxel grid exceeds memory budget: " + std::to_string(total) +
                          " voxels (limit " + std::to_string(options.max_voxels) + ")");
  grid.values.resize(total);

  // Bin projected triangles over (j,k) rows for the parity pass.
  std::vector<ProjTri> proj;
  proj.reserve(mesh.triangles.size());
  const int ny = grid.dims.y(), nz = grid.dims.z();
  std::vector<std::vector<int>> bins(static_cast<std::size_t>(ny) * nz);
  for (const auto& tri : mesh.triangles) {
    const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]], &c = mesh.vertices[tri[2]];
    ProjTri p{a.y(), a.z(), b.y(), b.z(), c.y(), c.z(), (b - a).cross(c - a), 0.0};
    if (p.n.x() == 0.0) continue;  // plane parallel to the scan direction
    if (p.n.x() < 0.0) {
      std::swap(p.by, p.cy);
      std::swap(p.bz, p.cz);
      // keep the original plane; only the 2D winding is normalized
    }
    p.d = p.n.dot(a);
    const int idx = static_cast<int>(proj.size());
    proj.push_back(p);

    const double ymin = std::min({p.ay, p.by, p.cy}), ymax = std::max({p.ay, p.by, p.cy});
    const double zmin = std::min({p.az, p.bz, p.cz}), zmax = std::max({p.az, p.bz, p.cz});
    const int j0 = std::max(0, static_cast<int>(std::ceil((ymin - grid.origin.y()) / h)));
    const int j1 = std::min(ny - 1, static_cast<int>(std::floor((ymax - grid.origin.y()) / h)));
    const int k0 = std::max(0, static_cast<int>(std::ceil((zmin - grid.origin.z()) / h)));
    const int k1 = std::min(nz - 1, static_cast<int>(std::floor((zmax - grid.origin.z()) / h)));
    for (int k = k0; k <= k1; ++k)
      for (int j = j0; j <= j1; ++j) bins[static_cast<std::size_t>(j) + ny * k].push_back(idx);
  }

  const TriangleBvh bvh(mesh);
  const int nx = grid.dims.x();

  auto process_slab = [&](int k_begin, int k_end) {
    std::vector<double> crossings;
    for (int k = k_begin; k < k_end; ++k) {
      for (int j = 0; j < ny; ++j) {
        const double y = grid.origin.y() + j * h;
        const double z = grid.origin.z() + k * h;
        crossings.clear();
        for (int f : bins[static_cast<std::size_t>(j) + ny * k]) {
          const ProjTri& t = proj[f];
          if (covers(t, y, z))
            crossings.push_back((t.d - t.n.y() * y - t.n.z() * z) / t.n.x());
        }
        std::sort(crossings.begin(), crossings.end());
        std::size_t next = 0;
        for (int i = 0; i < nx; ++i) {
          const Vec3 p = grid.center(i, j, k);
          while (next < crossings.size() && crossings[next] < p.x()) ++next;
          const bool inside = (next % 2) == 1;
          const double dist = bvh.closest(p).distance;
          grid.at(i, j, k) = static_cast<float>(inside ? -dist : dist);
        }
      }
    }
  };

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, nz);
  if (threads == 1) {
    process_slab(0, nz);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (nz + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int k0 = t * chunk, k1 = std::min(nz, k0 + chunk);
      if (k0 < k1) pool.emplace_back(process_slab, k0, k1);
    }
    for (auto& th : pool) th.join();
  }
  return grid;
}

SdfGrid csg_subtract(SdfGrid grid, const std::vector<OrientedBox>& cutters, CsgReport* report) {
  const double h = grid.voxel_size;
  const Vec3 lo = grid.origin - 0.5 * h * Vec3::Ones();
  const Vec3 hi = grid.center(grid.dims.x() - 1, grid.dims.y() - 1, grid.dims.z() - 1) +
                  0.5 * h * Vec3::Ones();
  for (std::size_t c = 0; c < cutters.size(); ++c) {
    const OrientedBox& cutter = cutters[c];
    const Vec3 half = cutter.pose.rotation.cwiseAbs() * (0.5 * cutter.extents);
    const Vec3 bmin = cutter.pose.translation - half;
    const Vec3 bmax = cutter.pose.translation + half;
    if ((bmax.array() < lo.array()).any() || (bmin.array() > hi.array()).any()) {
      if (report) report->skipped_outside.push_back(c);
      continue;
    }
    for (int k = 0; k < grid.dims.z(); ++k)
      for (int j = 0; j < grid.dims.y(); ++j)
        for (int i = 0; i < grid.dims.x(); ++i) {
          const double d = box_sdf(cutter, grid.center(i, j, k));
          float& v = grid.at(i, j, k);
          v = std::max(v, static_cast<float>(-d));
        }
  }
  return grid;
}

namespace {

// Kuhn subdivision: six positively oriented tetrahedra around the main cube
// diagonal. Corner bits: 1 -> +x, 2 -> +y, 4 -> +z. The split is identical in
// every cell, so shared cube faces triangulate consistently.
constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 1, 7, 5}, {0, 2, 7, 3},
                             {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 7, 6}};

// Even permutations of (0,1,2,3) starting at each index; used to emit
// consistently wound crossing triangles.
constexpr int kEvenPerm[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 0, 1, 3}, {3, 0, 2, 1}};

int permutation_parity(const std::array<int, 4>& p) {
  int inv = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) ++inv;
  return inv % 2;
}

}  // namespace

TriMesh extract_surface(const SdfGrid& grid) {
  bool any_neg = false, any_pos = false;
  for (float v : grid.values) {
    any_neg |= v < 0.0f;
    any_pos |= v >= 0.0f;
  }
  if (!any_neg || !any_pos)
    throw ValidationError("extract_surface: grid must contain both signs");

  TriMesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;

  auto value_at = [&](std::size_t gid) {
    const double v = grid.values[gid];
    return v == 0.0 ? 1e-12 : v;  // on-surface samples count as outside
  };
  auto point_at = [&](std::size_t gid) {
    const int i = static_cast<int>(gid % grid.dims.x());
    const std::size_t r = gid / grid.dims.x();
    const int j = static_cast<int>(r % grid.dims.y());
    const int k = static_cast<int>(r / grid.dims.y());
    return grid.center(i, j, k);
  };
  auto crossing = [&](std::size_t ga, std::size_t gb) {
    if (ga > gb) std::swap(ga, gb);
    const std::uint64_t key = (static_cast<std::uint64_t>(ga) << 32) | gb;
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double va = value_at(ga), vb = value_at(gb);
    const double t = va / (va - vb);
    const int idx = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(point_at(ga) + t * (point_at(gb) - point_at(ga)));
    edge_vertex.emplace(key, idx);
    return idx;
  };

  std::size_t corner_gid[8];
  double corner_val[8];
  for (int k = 0; k + 1 < grid.dims.z(); ++k)
    for (int j = 0; j + 1 < grid.dims.y(); ++j)
      for (int i = 0; i + 1 < grid.dims.x(); ++i) {
        for (int c = 0; c < 8; ++c) {
          corner_gid[c] = grid.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          corner_val[c] = value_at(corner_gid[c]);
        }
        bool neg = false, pos = false;
        for (double v : corner_val) (v < 0.0 ? neg : pos) = true;
        if (!neg || !pos) continue;

        for (const auto& tet : kTets) {
          int negs[4], nneg = 0;
          int poss[4], npos = 0;
          for (int s = 0; s < 4; ++s)
            (corner_val[tet[s]] < 0.0 ? negs[nneg++] : poss[npos++]) = s;
          if (nneg == 0 || nneg == 4) continue;

          auto E = [&](int a, int b) { return crossing(corner_gid[tet[a]], corner_gid[tet[b]]); };
          if (nneg == 1) {
            const int* p = kEvenPerm[negs[0]];
            mesh.triangles.push_back({E(p[0], p[1]), E(p[0], p[2]), E(p[0], p[3])});
          } else if (nneg == 3) {
            const int* p = kEvenPerm[poss[0]];
            mesh.triangles.push_back({E(p[0], p[1]), E(p[0], p[3]), E(p[0], p[2])});
          } else {
            std::array<int, 4> perm{negs[0], negs[1], poss[0], poss[1]};
            if (permutation_parity(perm) != 0) std::swap(perm[2], perm[3]);
            const int ik = E(perm[0], perm[2]), il = E(perm[0], perm[3]);
            const int jl = E(perm[1], perm[3]), jk = E(perm[1], perm[2]);
            mesh.triangles.push_back({ik, il, jl});
            mesh.triangles.push_back({ik, jl, jk});
          }
        }
      }
  compute_normals(mesh);
  return mesh;
}

double solid_volume(const SdfGrid& grid) {
  const double h = grid.voxel_size;
  const double cell = h * h * h;
  double vol = 0.0;
  for (float v : grid.values)
    vol += cell * std::clamp(0.5 - static_cast<double>(v) / h, 0.0, 1.0);
  return vol;
}

double negative_voxel_volume(const SdfGrid& grid) {
  const double cell = grid.voxel_size * grid.voxel_size * grid.voxel_size;
  std::size_t n = 0;
  for (float v : grid.values) n += v < 0.0f;
  return cell * static_cast<double>(n);
}

}  // namespace tofskin

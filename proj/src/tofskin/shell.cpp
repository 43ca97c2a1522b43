#include "tofskin/shell.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "tofskin/errors.hpp"

namespace tofskin {

namespace {

// Moller 1997 interval-overlap triangle-triangle test.
bool tri_tri_intersect(const Vec3& v0, const Vec3& v1, const Vec3& v2,
                       const Vec3& u0, const Vec3& u1, const Vec3& u2) {
  constexpr double eps = 1e-12;

  const Vec3 n1 = (v1 - v0).cross(v2 - v0);
  const double d1 = -n1.dot(v0);
  double du0 = n1.dot(u0) + d1, du1 = n1.dot(u1) + d1, du2 = n1.dot(u2) + d1;
  if (std::abs(du0) < eps) du0 = 0.0;
  if (std::abs(du1) < eps) du1 = 0.0;
  if (std::abs(du2) < eps) du2 = 0.0;
  if (du0 * du1 > 0.0 && du0 * du2 > 0.0) return false;

  const Vec3 n2 = (u1 - u0).cross(u2 - u0);
  const double d2 = -n2.dot(u0);
  double dv0 = n2.dot(v0) + d2, dv1 = n2.dot(v1) + d2, dv2 = n2.dot(v2) + d2;
  if (std::abs(dv0) < eps) dv0 = 0.0;
  if (std::abs(dv1) < eps) dv1 = 0.0;
  if (std::abs(dv2) < eps) dv2 = 0.0;
  if (dv0 * dv1 > 0.0 && dv0 * dv2 > 0.0) return false;

  const Vec3 dir = n1.cross(n2);

  if (dir.squaredNorm() < eps * eps) {
    // Coplanar: project to the dominant plane of n1 and run 2D overlap.
    int i0, i1;
    const Vec3 a = n1.cwiseAbs();
    if (a.x() >= a.y() && a.x() >= a.z()) {
      i0 = 1;
      i1 = 2;
    } else if (a.y() >= a.z()) {
      i0 = 0;
      i1 = 2;
    } else {
      i0 = 0;
      i1 = 1;
    }
    auto edge_vs_tri = [&](const Vec3& p, const Vec3& q) {
      const Vec3* tri[3] = {&u0, &u1, &u2};
      for (int e = 0; e < 3; ++e) {
        const Vec3& r = *tri[e];
        const Vec3& s = *tri[(e + 1) % 3];
        const double ax = q[i0] - p[i0], ay = q[i1] - p[i1];
        const double bx = r[i0] - s[i0], by = r[i1] - s[i1];
        const double cx = p[i0] - r[i0], cy = p[i1] - r[i1];
        const double f = ay * bx - ax * by;
        const double d = by * cx - bx * cy;
        if ((f > 0.0 && d >= 0.0 && d <= f) || (f < 0.0 && d <= 0.0 && d >= f)) {
          const double e2 = ax * cy - ay * cx;
          if (f > 0.0 ? (e2 >= 0.0 && e2 <= f) : (e2 <= 0.0 && e2 >= f)) return true;
        }
      }
      return false;
    };
    auto point_in_tri = [&](const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2) {
      double s0 = (t1[i0] - t0[i0]) * (p[i1] - t0[i1]) - (t1[i1] - t0[i1]) * (p[i0] - t0[i0]);
      double s1 = (t2[i0] - t1[i0]) * (p[i1] - t1[i1]) - (t2[i1] - t1[i1]) * (p[i0] - t1[i0]);
      double s2 = (t0[i0] - t2[i0]) * (p[i1] - t2[i1]) - (t0[i1] - t2[i1]) * (p[i0] - t2[i0]);
      return (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
    };
    return edge_vs_tri(v0, v1) || edge_vs_tri(v1, v2) || edge_vs_tri(v2, v0) ||
           point_in_tri(v0, u0, u1, u2) || point_in_tri(u0, v0, v1, v2);
  }

  // Interval of each triangle on the intersection line.
  int axis;
  dir.cwiseAbs().maxCoeff(&axis);
  auto interval = [&](const Vec3& a, const Vec3& b, const Vec3& c, double da, double db,
                      double dc, double& t0, double& t1) {
    const double pa = a[axis], pb = b[axis], pc = c[axis];
    // pick the lone vertex on one side
    auto cross_t = [](double p0, double p1, double e0, double e1) {
      return p0 + (p1 - p0) * e0 / (e0 - e1);
    };
    if (da * db > 0.0) {  // c alone
      t0 = cross_t(pa, pc, da, dc);
      t1 = cross_t(pb, pc, db, dc);
    } else if (da * dc > 0.0) {  // b alone
      t0 = cross_t(pa, pb, da, db);
      t1 = cross_t(pc, pb, dc, db);
    } else if (db * dc > 0.0 || da != 0.0) {  // a alone
      t0 = cross_t(pb, pa, db, da);
      t1 = cross_t(pc, pa, dc, da);
    } else if (db != 0.0) {
      t0 = cross_t(pa, pb, da, db);
      t1 = cross_t(pc, pb, dc, db);
    } else if (dc != 0.0) {
      t0 = cross_t(pa, pc, da, dc);
      t1 = cross_t(pb, pc, db, dc);
    } else {
      t0 = t1 = pa;  // degenerate, treated as touching point
    }
    if (t0 > t1) std::swap(t0, t1);
    return true;
  };
  double a0, a1, b0, b1;
  interval(v0, v1, v2, dv0, dv1, dv2, a0, a1);
  interval(u0, u1, u2, du0, du1, du2, b0, b1);
  return std::max(a0, b0) <= std::min(a1, b1);
}

std::int64_t cell_key(int x, int y, int z) {
  return (static_cast<std::int64_t>(x) * 73856093) ^ (static_cast<std::int64_t>(y) * 19349663) ^
         (static_cast<std::int64_t>(z) * 83492791);
}

}  // namespace

std::vector<std::pair<int, int>> find_self_intersections(const TriMesh& mesh) {
  std::vector<std::pair<int, int>> hits;
  if (mesh.triangles.empty()) return hits;
  const double cell = std::max(2.0 * mean_edge_length(mesh), 1e-9);

  std::unordered_map<std::int64_t, std::vector<int>> grid;
  auto tri_box = [&](int f) {
    Eigen::AlignedBox3d box;
    for (int i = 0; i < 3; ++i) box.extend(mesh.vertices[mesh.triangles[f][i]]);
    return box;
  };
  for (int f = 0; f < static_cast<int>(mesh.triangles.size()); ++f) {
    const auto box = tri_box(f);
    const Eigen::Vector3i lo = (box.min() / cell).array().floor().cast<int>();
    const Eigen::Vector3i hi = (box.max() / cell).array().floor().cast<int>();
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x) grid[cell_key(x, y, z)].push_back(f);
  }

  auto shares_vertex = [&](int f, int g) {
    const auto& a = mesh.triangles[f];
    const auto& b = mesh.triangles[g];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (a[i] == b[j]) return true;
    return false;
  };

  std::unordered_set<std::int64_t> tested;
  for (const auto& [key, faces] : grid) {
    for (std::size_t i = 0; i < faces.size(); ++i)
      for (std::size_t j = i + 1; j < faces.size(); ++j) {
        int f = faces[i], g = faces[j];
        if (f > g) std::swap(f, g);
        if (!tested.insert((static_cast<std::int64_t>(f) << 32) | g).second) continue;
        if (shares_vertex(f, g)) continue;
        if (!tri_box(f).intersects(tri_box(g))) continue;
        const auto& a = mesh.triangles[f];
        const auto& b = mesh.triangles[g];
        if (tri_tri_intersect(mesh.vertices[a[0]], mesh.vertices[a[1]], mesh.vertices[a[2]],
                              mesh.vertices[b[0]], mesh.vertices[b[1]], mesh.vertices[b[2]]))
          hits.emplace_back(f, g);
      }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

OffsetShellResult offset_shell(const TriMesh& mesh, const SkinParams& params) {
  if (params.thickness <= 0.0) throw ValidationError("thickness must be positive");
  if (params.gap < 0.0) throw ValidationError("gap must be non-negative");
  if (mesh.triangles.empty()) throw ValidationError("offset_shell: empty mesh");

  std::vector<int> region;
  if (params.region) {
    region = *params.region;
    std::sort(region.begin(), region.end());
    region.erase(std::unique(region.begin(), region.end()), region.end());
    if (region.empty()) throw ValidationError("offset_shell: empty region");
    if (region.front() < 0 || region.back() >= static_cast<int>(mesh.triangles.size()))
      throw ValidationError("offset_shell: region face index out of range");
  } else {
    region.resize(mesh.triangles.size());
    std::iota(region.begin(), region.end(), 0);
  }

  // Edge usage inside the region: 1 = boundary, 2 = interior.
  std::map<std::pair<int, int>, int> edge_count;
  for (int f : region) {
    const auto& t = mesh.triangles[f];
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      int& c = edge_count[{std::min(a, b), std::max(a, b)}];
      if (++c > 2) throw ValidationError("offset_shell: region has a non-manifold edge");
    }
  }

  // Connectivity over shared edges.
  {
    std::map<std::pair<int, int>, std::vector<int>> edge_faces;
    for (int f : region) {
      const auto& t = mesh.triangles[f];
      for (int i = 0; i < 3; ++i)
        edge_faces[{std::min(t[i], t[(i + 1) % 3]), std::max(t[i], t[(i + 1) % 3])}].push_back(f);
    }
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& [e, fs] : edge_faces)
      if (fs.size() == 2) {
        adj[fs[0]].push_back(fs[1]);
        adj[fs[1]].push_back(fs[0]);
      }
    std::unordered_set<int> seen;
    std::queue<int> work;
    work.push(region.front());
    seen.insert(region.front());
    while (!work.empty()) {
      const int f = work.front();
      work.pop();
      for (int g : adj[f])
        if (seen.insert(g).second) work.push(g);
    }
    if (seen.size() != region.size())
      throw ValidationError("offset_shell: region is not edge-connected");
  }

  // Area-weighted vertex normals restricted to the region.
  std::unordered_map<int, int> local;  // mesh vertex -> local index
  std::vector<int> local_to_mesh;
  for (int f : region)
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.triangles[f][i];
      if (local.emplace(v, static_cast<int>(local_to_mesh.size())).second)
        local_to_mesh.push_back(v);
    }
  std::vector<Vec3> normals(local_to_mesh.size(), Vec3::Zero());
  for (int f : region) {
    const auto& t = mesh.triangles[f];
    const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    for (int i = 0; i < 3; ++i) normals[local[t[i]]] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (len <= 0.0) throw ValidationError("offset_shell: degenerate vertex normal");
    n /= len;
  }

  OffsetShellResult result;
  TriMesh& shell = result.mesh;
  const std::size_t nv = local_to_mesh.size();
  shell.vertices.resize(2 * nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const Vec3& v = mesh.vertices[local_to_mesh[i]];
    shell.vertices[i] = v + params.gap * normals[i];                          // inner
    shell.vertices[nv + i] = v + (params.gap + params.thickness) * normals[i];  // outer
  }

  auto inner = [&](int meshv) { return local[meshv]; };
  auto outer = [&](int meshv) { return static_cast<int>(nv) + local[meshv]; };

  for (int f : region) {  // outer surface keeps source winding
    const auto& t = mesh.triangles[f];
    shell.triangles.push_back({outer(t[0]), outer(t[1]), outer(t[2])});
  }
  result.outer_faces = shell.triangles.size();
  for (int f : region) {  // inner surface flipped toward the link
    const auto& t = mesh.triangles[f];
    shell.triangles.push_back({inner(t[2]), inner(t[1]), inner(t[0])});
  }
  result.inner_faces = shell.triangles.size() - result.outer_faces;

  for (int f : region) {  // seal open boundaries
    const auto& t = mesh.triangles[f];
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3];
      if (edge_count[{std::min(a, b), std::max(a, b)}] != 1) continue;
      shell.triangles.push_back({inner(a), inner(b), outer(b)});
      shell.triangles.push_back({inner(a), outer(b), outer(a)});
    }
  }
  result.wall_faces = shell.triangles.size() - result.outer_faces - result.inner_faces;

  compute_normals(shell);
  result.self_intersections = find_self_intersections(shell);
  return result;
}

OrientedBox pcb_cutter(const PcbFootprint& pcb, const Pose& mount) {
  if (pcb.width <= 0.0 || pcb.height <= 0.0 || pcb.depth <= 0.0)
    throw ValidationError("pcb footprint extents must be positive");
  if (pcb.clearance < 0.0) throw ValidationError("pcb clearance must be non-negative");
  OrientedBox box;
  box.extents = Vec3(pcb.width + 2.0 * pcb.clearance, pcb.height + 2.0 * pcb.clearance,
                     pcb.depth + 2.0 * pcb.clearance);
  box.pose.rotation = mount.rotation;
  box.pose.translation = mount.translation - mount.rotation.col(2) * (0.5 * pcb.depth);
  return box;
}

}  // namespace tofskin

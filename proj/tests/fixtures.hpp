#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tofskin/mesh.hpp"
#include "tofskin/types.hpp"

namespace fixtures {

using tofskin::TriMesh;
using tofskin::Vec3;

// Flat rectangle in the xy plane (z = 0), normals +z, nx-by-ny quads.
inline TriMesh rect_patch(double sx, double sy, int nx, int ny) {
  TriMesh m;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.emplace_back(sx * i / nx, sy * j / ny, 0.0);
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  tofskin::compute_normals(m);
  return m;
}

// Open tube around the z axis, outward normals, no caps. sweep < 2*pi leaves
// the seam open (half cylinder etc.).
inline TriMesh tube(double radius, double length, int segments, int rings,
                    double sweep = 2.0 * std::numbers::pi) {
  TriMesh m;
  const bool closed = sweep >= 2.0 * std::numbers::pi - 1e-12;
  const int ncol = closed ? segments : segments + 1;
  for (int j = 0; j <= rings; ++j)
    for (int i = 0; i < ncol; ++i) {
      const double a = sweep * i / segments;
      m.vertices.emplace_back(radius * std::cos(a), radius * std::sin(a),
                              length * j / rings);
    }
  auto id = [&](int i, int j) { return j * ncol + (i % ncol); };
  for (int j = 0; j < rings; ++j)
    for (int i = 0; i < segments; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  tofskin::compute_normals(m);
  return m;
}

// Watertight UV sphere, outward normals.
inline TriMesh uv_sphere(double radius, int stacks, int slices,
                         const Vec3& center = Vec3::Zero()) {
  TriMesh m;
  m.vertices.push_back(center + Vec3(0, 0, radius));  // north pole
  for (int s = 1; s < stacks; ++s) {
    const double phi = std::numbers::pi * s / stacks;
    for (int t = 0; t < slices; ++t) {
      const double theta = 2.0 * std::numbers::pi * t / slices;
      m.vertices.push_back(center + radius * Vec3(std::sin(phi) * std::cos(theta),
                                                  std::sin(phi) * std::sin(theta),
                                                  std::cos(phi)));
    }
  }
  m.vertices.push_back(center + Vec3(0, 0, -radius));  // south pole
  const int south = static_cast<int>(m.vertices.size()) - 1;
  auto ring = [&](int s, int t) { return 1 + (s - 1) * slices + (t % slices); };
  for (int t = 0; t < slices; ++t)
    m.triangles.push_back({0, ring(1, t), ring(1, t + 1)});
  for (int s = 1; s + 1 < stacks; ++s)
    for (int t = 0; t < slices; ++t) {
      m.triangles.push_back({ring(s, t), ring(s + 1, t), ring(s + 1, t + 1)});
      m.triangles.push_back({ring(s, t), ring(s + 1, t + 1), ring(s, t + 1)});
    }
  for (int t = 0; t < slices; ++t)
    m.triangles.push_back({south, ring(stacks - 1, t + 1), ring(stacks - 1, t)});
  tofskin::compute_normals(m);
  return m;
}

// Watertight axis-aligned box, outward normals.
inline TriMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  TriMesh m;
  for (int c = 0; c < 8; ++c)
    m.vertices.emplace_back(c & 1 ? hi.x() : lo.x(), c & 2 ? hi.y() : lo.y(),
                            c & 4 ? hi.z() : lo.z());
  const int quads[6][4] = {
      {0, 4, 6, 2},  // x = lo
      {1, 3, 7, 5},  // x = hi
      {0, 1, 5, 4},  // y = lo
      {2, 6, 7, 3},  // y = hi
      {0, 2, 3, 1},  // z = lo
      {4, 5, 7, 6},  // z = hi
  };
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  tofskin::compute_normals(m);
  return m;
}

inline std::vector<int> all_faces(const TriMesh& m) {
  std::vector<int> region(m.triangles.size());
  std::iota(region.begin(), region.end(), 0);
  return region;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("tofskin_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline void write_obj(const std::filesystem::path& p, const TriMesh& m) {
  std::ofstream out(p, std::ios::binary);
  char buf[128];
  for (const auto& v : m.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : m.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixtures

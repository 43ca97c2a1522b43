#pragma once

#include <vector>

#include "tofskin/mesh.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

// Axis-aligned BVH over a triangle soup for closest-point queries. Triangle
// data is copied; the source mesh may be discarded.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriMesh& mesh);

  struct Closest {
    double distance = 0.0;
    int triangle = -1;
    Vec3 point = Vec3::Zero();
  };
  Closest closest(const Vec3& query) const;

  std::size_t triangle_count() const { return tris_.size(); }

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;   // child node, or -1 for leaf
    int right = -1;
    int begin = 0;   // leaf triangle range
    int end = 0;
  };
  struct Tri {
    Vec3 a, b, c;
  };

  int build(int begin, int end, int depth);

  std::vector<Tri> tris_;
  std::vector<int> order_;
  std::vector<Vec3> centroids_;
  std::vector<Node> nodes_;
};

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace tofskin

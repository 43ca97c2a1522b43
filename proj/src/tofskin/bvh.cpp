#include "tofskin/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tofskin {

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleBvh::TriangleBvh(const TriMesh& mesh) {
  tris_.reserve(mesh.triangles.size());
  centroids_.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    Tri tri{mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
    centroids_.push_back((tri.a + tri.b + tri.c) / 3.0);
    tris_.push_back(tri);
  }
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!tris_.empty()) build(0, static_cast<int>(tris_.size()), 0);
}

int TriangleBvh::build(int begin, int end, int depth) {
  Node node;
  node.begin = begin;
  node.end = end;
  for (int i = begin; i < end; ++i) {
    const Tri& t = tris_[order_[i]];
    node.box.extend(t.a);
    node.box.extend(t.b);
    node.box.extend(t.c);
  }
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 4 || depth > 48) return index;

  int axis;
  node.box.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int lhs, int rhs) { return centroids_[lhs][axis] < centroids_[rhs][axis]; });
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

TriangleBvh::Closest TriangleBvh::closest(const Vec3& q) const {
  Closest best;
  best.distance = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.exteriorDistance(q) >= best.distance) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const Tri& t = tris_[order_[i]];
        const Vec3 cp = closest_point_on_triangle(q, t.a, t.b, t.c);
        const double d = (cp - q).norm();
        if (d < best.distance) {
          best.distance = d;
          best.triangle = order_[i];
          best.point = cp;
        }
      }
      continue;
    }
    // visit nearer child first
    const double dl = nodes_[node.left].box.exteriorDistance(q);
    const double dr = nodes_[node.right].box.exteriorDistance(q);
    if (dl < dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

}  // namespace tofskin

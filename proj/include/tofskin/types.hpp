#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace tofskin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Wire value meaning "no target / out of range" for one ToF zone.
inline constexpr std::uint16_t kRangeSentinel = 0xFFFF;

// Rigid transform. Columns of rotation are the frame axes expressed in the
// parent frame; translation is the frame origin.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

inline Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline Pose inverse(const Pose& p) {
  Mat3 rt = p.rotation.transpose();
  return {rt, -(rt * p.translation)};
}

inline Vec3 apply(const Pose& p, const Vec3& x) {
  return p.rotation * x + p.translation;
}

inline Pose rotation_about(const Vec3& axis, double angle) {
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(),
          Vec3::Zero()};
}

inline Pose translation_of(const Vec3& t) { return {Mat3::Identity(), t}; }

inline bool is_special_orthogonal(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         r.determinant() > 0.0;
}

// Nearest rotation matrix by polar decomposition.
inline Mat3 orthonormalized(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 q = svd.matrixU() * svd.matrixV().transpose();
  if (q.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    q = u * svd.matrixV().transpose();
  }
  return q;
}

}  // namespace tofskin

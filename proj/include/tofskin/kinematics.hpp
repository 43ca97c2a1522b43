#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tofskin/types.hpp"

namespace tofskin {

enum class JointType { revolute, fixed };

struct ChainLink {
  std::string name;
  Pose fixed_pose;  // parent -> joint
  Vec3 axis = Vec3::UnitZ();
  JointType type = JointType::fixed;
};

struct KinematicChain {
  std::vector<ChainLink> links;

  int revolute_count() const;
  int find(const std::string& name) const;  // -1 if absent
};

struct JointState {
  std::vector<double> angles;  // radians, one per revolute joint in chain order
};

// Product of fixed_pose * rotation(axis, q_i) down the chain through the
// named link.
Pose forward_kinematics(const KinematicChain& chain, const JointState& q,
                        const std::string& link_name);

std::vector<Vec3> transform_points(const Pose& pose, std::span<const Vec3> points);

// JSON chain file: {links:[{name, rotation_rowmajor:[9], translation_m:[3],
// axis:[3], type}]}. Rotations within 1e-6 of orthonormal are snapped by
// polar projection, worse ones rejected.
KinematicChain load_chain(const std::filesystem::path& path);
void save_chain(const KinematicChain& chain, const std::filesystem::path& path);

// JSON joint state: {angles_rad:[...]}.
JointState load_joints(const std::filesystem::path& path);
void save_joints(const JointState& q, const std::filesystem::path& path);

}  // namespace tofskin

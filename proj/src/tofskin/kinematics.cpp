#include "tofskin/kinematics.hpp"

#include <unordered_set>

#include "tofskin/errors.hpp"
#include "json_io.hpp"

namespace tofskin {

int KinematicChain::revolute_count() const {
  int n = 0;
  for (const auto& link : links) n += link.type == JointType::revolute;
  return n;
}

int KinematicChain::find(const std::string& name) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].name == name) return static_cast<int>(i);
  return -1;
}

Pose forward_kinematics(const KinematicChain& chain, const JointState& q,
                        const std::string& link_name) {
  const int target = chain.find(link_name);
  if (target < 0) throw ValidationError("unknown link: " + link_name);
  if (static_cast<int>(q.angles.size()) != chain.revolute_count())
    throw ValidationError("joint state size mismatch: got " +
                          std::to_string(q.angles.size()) + ", chain has " +
                          std::to_string(chain.revolute_count()) + " revolute joints");
  Pose pose;
  std::size_t angle_index = 0;
  for (int i = 0; i <= target; ++i) {
    const ChainLink& link = chain.links[i];
    pose = compose(pose, link.fixed_pose);
    if (link.type == JointType::revolute)
      pose = compose(pose, rotation_about(link.axis, q.angles[angle_index++]));
  }
  return pose;
}

std::vector<Vec3> transform_points(const Pose& pose, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(apply(pose, p));
  return out;
}

KinematicChain load_chain(const std::filesystem::path& path) {
  const auto j = detail::load_json_file(path, "chain");
  if (!j.contains("links") || !j["links"].is_array())
    throw FormatError("chain file must contain a links array");
  KinematicChain chain;
  std::unordered_set<std::string> names;
  for (const auto& lj : j["links"]) {
    ChainLink link;
    if (!lj.contains("name") || !lj["name"].is_string())
      throw FormatError("chain link missing name");
    link.name = lj["name"].get<std::string>();
    if (!names.insert(link.name).second)
      throw FormatError("duplicate link name: " + link.name);
    link.fixed_pose.rotation =
        detail::checked_rotation(detail::mat3_rowmajor_from(lj.at("rotation_rowmajor"),
                                                            "rotation_rowmajor"),
                                 ("link " + link.name).c_str());
    link.fixed_pose.translation = detail::vec3_from(lj.at("translation_m"), "translation_m");
    link.axis = detail::vec3_from(lj.at("axis"), "axis");
    const double len = link.axis.norm();
    if (len < 1e-9) throw FormatError("link " + link.name + ": zero joint axis");
    link.axis /= len;
    const std::string type = lj.at("type").get<std::string>();
    if (type == "revolute")
      link.type = JointType::revolute;
    else if (type == "fixed")
      link.type = JointType::fixed;
    else
      throw FormatError("link " + link.name + ": unknown joint type " + type);
    chain.links.push_back(std::move(link));
  }
  if (chain.links.empty()) throw FormatError("chain has no links");
  return chain;
}

void save_chain(const KinematicChain& chain, const std::filesystem::path& path) {
  detail::Json j;
  j["links"] = detail::Json::array();
  for (const auto& link : chain.links) {
    detail::Json lj;
    lj["name"] = link.name;
    lj["rotation_rowmajor"] = detail::rowmajor(link.fixed_pose.rotation);
    lj["translation_m"] = detail::to_json(link.fixed_pose.translation);
    lj["axis"] = detail::to_json(link.axis);
    lj["type"] = link.type == JointType::revolute ? "revolute" : "fixed";
    j["links"].push_back(std::move(lj));
  }
  detail::save_json_file(j, path, "chain");
}

JointState load_joints(const std::filesystem::path& path) {
  const auto j = detail::load_json_file(path, "joint state");
  if (!j.contains("angles_rad") || !j["angles_rad"].is_array())
    throw FormatError("joint state file must contain angles_rad");
  JointState q;
  for (const auto& a : j["angles_rad"]) {
    if (!a.is_number()) throw FormatError("angles_rad must contain numbers");
    q.angles.push_back(a.get<double>());
  }
  return q;
}

void save_joints(const JointState& q, const std::filesystem::path& path) {
  detail::Json j;
  j["angles_rad"] = q.angles;
  detail::save_json_file(j, path, "joint state");
}

}  // namespace tofskin

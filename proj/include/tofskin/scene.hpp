#pragma once

#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "tofskin/frustum.hpp"
#include "tofskin/kinematics.hpp"
#include "tofskin/manifest.hpp"
#include "tofskin/rng.hpp"
#include "tofskin/sdf.hpp"
#include "tofskin/telemetry.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

struct Plane {
  Vec3 point;
  Vec3 normal;  // unit
};

using Primitive = std::variant<Sphere, OrientedBox, Plane>;

struct Scene {
  std::vector<Primitive> primitives;
};

struct NoiseModel {
  double sigma_mm = 0.0;  // additive Gaussian range noise
  std::uint64_t seed = 0;
};

// Smallest positive hit distance across all primitives, if any.
std::optional<double> ray_cast(const Scene& scene, const Vec3& origin, const Vec3& dir);

// Unsigned distance from a point to the nearest primitive surface.
double surface_distance(const Scene& scene, const Vec3& p);

// One zone reading: cast the zone ray in world frame; in-range hits become
// round(1000*t + noise) clamped to [0, 65534], everything else the sentinel.
std::uint16_t sense_zone(const Scene& scene, const Pose& sensor_world,
                         const FrustumModel& model, int row, int col, double sigma_mm,
                         Rng& rng);

// Ground-truth frames for every manifest sensor: frames_per_sensor frames
// each, sequences from 0, timestamps spaced 1/rate_hz, emitted in rounds
// (all sensors at sequence 0, then 1, ...). Per-sensor noise streams are
// derived from (seed, sensor_index), so output is byte-stable for a seed.
std::vector<ToFFrame> simulate_capture(const Scene& scene, const SensorManifest& manifest,
                                       const KinematicChain& chain, const JointState& q,
                                       int frames_per_sensor, double rate_hz,
                                       const NoiseModel& noise,
                                       double min_range = 0.0, double max_range = 4.0);

// JSON: {primitives:[{type:"sphere", center_m, radius_m} |
// {type:"box", rotation_rowmajor, translation_m, extents_m} |
// {type:"plane", point_m, normal}]}
Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

}  // namespace tofskin

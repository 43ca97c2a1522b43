#include "tofskin/scene.hpp"

#include <algorithm>
#include <cmath>

#include "tofskin/errors.hpp"
#include "json_io.hpp"

namespace tofskin {

namespace {

std::optional<double> hit_sphere(const Sphere& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > 0.0) return t0;
  const double t1 = -b + sq;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

std::optional<double> hit_box(const OrientedBox& box, const Vec3& o, const Vec3& d) {
  // slab test in the box frame
  const Mat3 rt = box.pose.rotation.transpose();
  const Vec3 lo_local = rt * (o - box.pose.translation);
  const Vec3 ld = rt * d;
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double half = 0.5 * box.extents[a];
    if (std::abs(ld[a]) < 1e-15) {
      if (std::abs(lo_local[a]) > half) return std::nullopt;
      continue;
    }
    double t0 = (-half - lo_local[a]) / ld[a];
    double t1 = (half - lo_local[a]) / ld[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmin > 0.0) return tmin;
  if (tmax > 0.0) return tmax;
  return std::nullopt;
}

std::optional<double> hit_plane(const Plane& plane, const Vec3& o, const Vec3& d) {
  const double denom = plane.normal.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = plane.normal.dot(plane.point - o) / denom;
  if (t > 0.0) return t;
  return std::nullopt;
}

}  // namespace

std::optional<double> ray_cast(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  std::optional<double> best;
  for (const Primitive& prim : scene.primitives) {
    const auto t = std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere>) return hit_sphere(p, origin, dir);
          else if constexpr (std::is_same_v<T, OrientedBox>) return hit_box(p, origin, dir);
          else return hit_plane(p, origin, dir);
        },
        prim);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

double surface_distance(const Scene& scene, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : scene.primitives) {
    const double d = std::visit(
        [&](const auto& x) -> double {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Sphere>)
            return std::abs((p - x.center).norm() - x.radius);
          else if constexpr (std::is_same_v<T, OrientedBox>)
            return std::abs(box_sdf(x, p));
          else
            return std::abs(x.normal.dot(p - x.point));
        },
        prim);
    best = std::min(best, d);
  }
  return best;
}

std::uint16_t sense_zone(const Scene& scene, const Pose& sensor_world,
                         const FrustumModel& model, int row, int col, double sigma_mm,
                         Rng& rng) {
  const ZoneRay ray = zone_direction(model, row, col);
  const Vec3 dir = sensor_world.rotation * ray.direction;
  const auto t = ray_cast(scene, sensor_world.translation, dir);
  if (!t || *t < model.min_range || *t > model.max_range) return kRangeSentinel;
  double mm = 1000.0 * *t;
  if (sigma_mm > 0.0) mm += rng.gaussian(0.0, sigma_mm);
  const double rounded = std::round(mm);
  return static_cast<std::uint16_t>(std::clamp(rounded, 0.0, 65534.0));
}

std::vector<ToFFrame> simulate_capture(const Scene& scene, const SensorManifest& manifest,
                                       const KinematicChain& chain, const JointState& q,
                                       int frames_per_sensor, double rate_hz,
                                       const NoiseModel& noise,
                                       double min_range, double max_range) {
  if (frames_per_sensor < 0) throw ValidationError("frames_per_sensor must be >= 0");
  if (rate_hz <= 0.0) throw ValidationError("rate_hz must be positive");

  const Pose link_pose = forward_kinematics(chain, q, manifest.link_name);

  struct SensorCtx {
    const SensorRecord* rec;
    Pose world;
    FrustumModel model;
    Rng rng;
  };
  Rng base(noise.seed);
  std::vector<SensorCtx> ctx;
  ctx.reserve(manifest.sensors.size());
  for (const auto& rec : manifest.sensors) {
    if (rec.rows != 8 || rec.cols != 8)
      throw ValidationError("wire frames carry exactly 8x8 zones; sensor " +
                            std::to_string(rec.index) + " declares " +
                            std::to_string(rec.rows) + "x" + std::to_string(rec.cols));
    ctx.push_back({&rec, compose(link_pose, rec.mount),
                   manifest.frustum_of(rec, min_range, max_range),
                   base.stream(static_cast<std::uint64_t>(rec.index))});
  }

  std::vector<ToFFrame> frames;
  frames.reserve(ctx.size() * static_cast<std::size_t>(frames_per_sensor));
  for (int f = 0; f < frames_per_sensor; ++f) {
    const auto ts = static_cast<std::uint64_t>(std::llround(f * 1e6 / rate_hz));
    for (auto& s : ctx) {
      ToFFrame frame;
      frame.sensor_index = static_cast<std::uint8_t>(s.rec->index);
      frame.sequence = static_cast<std::uint32_t>(f);
      frame.timestamp_us = ts;
      for (int row = 0; row < s.model.rows; ++row)
        for (int col = 0; col < s.model.cols; ++col)
          frame.ranges_mm[row * 8 + col] =
              sense_zone(scene, s.world, s.model, row, col, noise.sigma_mm, s.rng);
      frames.push_back(frame);
    }
  }
  return frames;
}

Scene load_scene(const std::filesystem::path& path) {
  const auto j = detail::load_json_file(path, "scene");
  if (!j.contains("primitives") || !j["primitives"].is_array())
    throw FormatError("scene file must contain a primitives array");
  Scene scene;
  try {
    for (const auto& pj : j["primitives"]) {
      const std::string type = pj.at("type").get<std::string>();
      if (type == "sphere") {
        Sphere s{detail::vec3_from(pj.at("center_m"), "center_m"),
                 pj.at("radius_m").get<double>()};
        if (s.radius <= 0.0) throw FormatError("sphere radius must be positive");
        scene.primitives.emplace_back(s);
      } else if (type == "box") {
        OrientedBox b;
        b.pose.rotation = detail::checked_rotation(
            detail::mat3_rowmajor_from(pj.at("rotation_rowmajor"), "rotation_rowmajor"),
            "box rotation");
        b.pose.translation = detail::vec3_from(pj.at("translation_m"), "translation_m");
        b.extents = detail::vec3_from(pj.at("extents_m"), "extents_m");
        if ((b.extents.array() <= 0.0).any())
          throw FormatError("box extents must be positive");
        scene.primitives.emplace_back(b);
      } else if (type == "plane") {
        Plane p{detail::vec3_from(pj.at("point_m"), "point_m"),
                detail::vec3_from(pj.at("normal"), "normal")};
        const double len = p.normal.norm();
        if (len < 1e-9) throw FormatError("plane normal must be nonzero");
        p.normal /= len;
        scene.primitives.emplace_back(p);
      } else {
        throw FormatError("unknown primitive type: " + type);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid scene (" + path.string() + "): " + e.what());
  }
  return scene;
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  detail::Json j;
  j["primitives"] = detail::Json::array();
  for (const Primitive& prim : scene.primitives) {
    detail::Json pj;
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            pj["type"] = "sphere";
            pj["center_m"] = detail::to_json(p.center);
            pj["radius_m"] = p.radius;
          } else if constexpr (std::is_same_v<T, OrientedBox>) {
            pj["type"] = "box";
            pj["rotation_rowmajor"] = detail::rowmajor(p.pose.rotation);
            pj["translation_m"] = detail::to_json(p.pose.translation);
            pj["extents_m"] = detail::to_json(p.extents);
          } else {
            pj["type"] = "plane";
            pj["point_m"] = detail::to_json(p.point);
            pj["normal"] = detail::to_json(p.normal);
          }
        },
        prim);
    j["primitives"].push_back(std::move(pj));
  }
  detail::save_json_file(j, path, "scene");
}

}  // namespace tofskin

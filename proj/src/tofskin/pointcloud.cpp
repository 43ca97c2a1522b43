#include "tofskin/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tofskin/errors.hpp"
#include "tofskin/version.hpp"

namespace tofskin {

std::uint64_t PointCloud::zones_total() const {
  std::uint64_t n = 0;
  for (const auto& [idx, s] : per_sensor) n += s.zones_total;
  return n;
}

std::uint64_t PointCloud::zones_valid() const {
  std::uint64_t n = 0;
  for (const auto& [idx, s] : per_sensor) n += s.zones_valid;
  return n;
}

double PointCloud::valid_fraction() const {
  const auto total = zones_total();
  return total ? static_cast<double>(zones_valid()) / static_cast<double>(total) : 0.0;
}

PointCloud assemble(std::span<const ToFFrame> frames, const SensorManifest& manifest,
                    const KinematicChain& chain, const JointState& q,
                    const AssembleOptions& options) {
  const Pose link_pose = forward_kinematics(chain, q, manifest.link_name);

  struct SensorCtx {
    Pose world;
    std::vector<ZoneRay> rays;
    FrustumModel model;
  };
  std::map<int, SensorCtx> ctx;
  for (const auto& rec : manifest.sensors) {
    if (rec.rows != 8 || rec.cols != 8)
      throw ValidationError("wire frames carry exactly 8x8 zones; sensor " +
                            std::to_string(rec.index) + " declares " +
                            std::to_string(rec.rows) + "x" + std::to_string(rec.cols));
    const FrustumModel model = manifest.frustum_of(rec, options.min_range, options.max_range);
    ctx.emplace(rec.index, SensorCtx{compose(link_pose, rec.mount), zone_rays(model), model});
  }

  // deterministic order regardless of arrival
  std::vector<const ToFFrame*> sorted;
  sorted.reserve(frames.size());
  for (const auto& f : frames) sorted.push_back(&f);
  std::stable_sort(sorted.begin(), sorted.end(), [](const ToFFrame* a, const ToFFrame* b) {
    if (a->sensor_index != b->sensor_index) return a->sensor_index < b->sensor_index;
    return a->sequence < b->sequence;
  });

  PointCloud cloud;
  for (const ToFFrame* frame : sorted) {
    ++cloud.frames_in;
    const auto it = ctx.find(frame->sensor_index);
    if (it == ctx.end()) {
      ++cloud.frames_dropped_unknown_sensor;
      continue;
    }
    const SensorCtx& s = it->second;
    auto& stats = cloud.per_sensor[frame->sensor_index];
    ++stats.frames;
    for (int z = 0; z < 64; ++z) {
      ++stats.zones_total;
      const auto local = project_zone(s.rays[z], frame->ranges_mm[z], s.model);
      if (!local) continue;
      ++stats.zones_valid;
      cloud.points.push_back({apply(s.world, *local), frame->sensor_index,
                              static_cast<std::uint8_t>(z / 8),
                              static_cast<std::uint8_t>(z % 8), frame->ranges_mm[z],
                              frame->timestamp_us});
    }
  }
  return cloud;
}

const std::array<std::array<std::uint8_t, 3>, 8>& sensor_palette() {
  static const std::array<std::array<std::uint8_t, 3>, 8> palette = {{
      {230, 25, 75},    // red
      {60, 180, 75},    // green
      {255, 225, 25},   // yellow
      {0, 130, 200},    // blue
      {245, 130, 48},   // orange
      {145, 30, 180},   // purple
      {70, 240, 240},   // cyan
      {240, 50, 230},   // magenta
  }};
  return palette;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               const std::vector<std::string>& comments, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file: " + path.string());
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "comment " << kToolName << " " << kVersion << " units=m\n";
  for (const auto& c : comments) out << "comment " << c << "\n";
  for (const auto& [idx, s] : cloud.per_sensor)
    out << "comment sensor_stats index=" << idx << " frames=" << s.frames
        << " zones_total=" << s.zones_total << " zones_valid=" << s.zones_valid << "\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";

  const auto& palette = sensor_palette();
  if (binary) {
    for (const auto& p : cloud.points) {
      const float xyz[3] = {static_cast<float>(p.position.x()),
                            static_cast<float>(p.position.y()),
                            static_cast<float>(p.position.z())};
      out.write(reinterpret_cast<const char*>(xyz), 12);
      const auto& c = palette[p.sensor_index % 8];
      out.write(reinterpret_cast<const char*>(c.data()), 3);
    }
  } else {
    char buf[128];
    for (const auto& p : cloud.points) {
      const auto& c = palette[p.sensor_index % 8];
      // store first so the narrowing is pinned before the vararg promotion
      const float xyz[3] = {static_cast<float>(p.position.x()),
                            static_cast<float>(p.position.y()),
                            static_cast<float>(p.position.z())};
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %u %u %u\n", xyz[0], xyz[1], xyz[2],
                    unsigned{c[0]}, unsigned{c[1]}, unsigned{c[2]});
      out << buf;
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_ply_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line != "ply") throw FormatError("not a PLY file: " + path.string());
  bool binary = false;
  std::size_t vertex_count = 0;
  std::vector<std::string> properties;
  PointCloud cloud;
  bool in_vertex_element = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt != "ascii") throw FormatError("unsupported PLY format: " + fmt);
    } else if (word == "comment") {
      std::string tag;
      ls >> tag;
      if (tag == "sensor_stats") {
        SensorZoneStats s;
        int index = -1;
        std::string kv;
        while (ls >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = kv.substr(0, eq);
          const std::uint64_t value = std::strtoull(kv.c_str() + eq + 1, nullptr, 10);
          if (key == "index") index = static_cast<int>(value);
          else if (key == "frames") s.frames = value;
          else if (key == "zones_total") s.zones_total = value;
          else if (key == "zones_valid") s.zones_valid = value;
        }
        if (index >= 0) cloud.per_sensor[index] = s;
      }
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      in_vertex_element = name == "vertex";
      if (in_vertex_element) vertex_count = count;
      else if (count != 0) throw FormatError("unsupported PLY element: " + name);
    } else if (word == "property") {
      if (in_vertex_element) {
        std::string type, name;
        ls >> type >> name;
        properties.push_back(name);
      }
    } else if (word == "end_header") {
      break;
    }
  }
  const std::vector<std::string> expected = {"x", "y", "z", "red", "green", "blue"};
  if (properties != expected)
    throw FormatError("unsupported PLY vertex layout in " + path.string());

  const auto& palette = sensor_palette();
  auto sensor_from_color = [&](unsigned r, unsigned g, unsigned b) -> int {
    for (std::size_t i = 0; i < palette.size(); ++i)
      if (palette[i][0] == r && palette[i][1] == g && palette[i][2] == b)
        return static_cast<int>(i);
    return 0;
  };

  cloud.points.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    float xyz[3];
    unsigned rgb[3];
    if (binary) {
      std::uint8_t c[3];
      in.read(reinterpret_cast<char*>(xyz), 12);
      in.read(reinterpret_cast<char*>(c), 3);
      if (!in) throw FormatError("truncated PLY payload: " + path.string());
      rgb[0] = c[0];
      rgb[1] = c[1];
      rgb[2] = c[2];
    } else {
      if (!std::getline(in, line)) throw FormatError("truncated PLY payload: " + path.string());
      if (std::sscanf(line.c_str(), "%f %f %f %u %u %u", &xyz[0], &xyz[1], &xyz[2], &rgb[0],
                      &rgb[1], &rgb[2]) != 6)
        throw FormatError("malformed PLY vertex line: " + line);
    }
    CloudPoint p;
    p.position = Vec3(xyz[0], xyz[1], xyz[2]);
    if (!p.position.allFinite()) throw FormatError("non-finite PLY vertex");
    p.sensor_index = static_cast<std::uint8_t>(sensor_from_color(rgb[0], rgb[1], rgb[2]));
    cloud.points.push_back(p);
  }
  return cloud;
}

EvalReport evaluate(const PointCloud& cloud, const Scene& scene) {
  if (scene.primitives.empty()) throw ValidationError("evaluate: scene has no primitives");

  struct Acc {
    std::uint64_t n = 0;
    double sum_sq = 0.0;
    double max = 0.0;
  };
  Acc global;
  std::map<int, Acc> per_sensor;
  for (const auto& p : cloud.points) {
    const double d = surface_distance(scene, p.position);
    for (Acc* a : {&global, &per_sensor[p.sensor_index]}) {
      ++a->n;
      a->sum_sq += d * d;
      a->max = std::max(a->max, d);
    }
  }

  auto entry_of = [](const Acc& a, const SensorZoneStats* stats) {
    EvalEntry e;
    e.points = a.n;
    e.rmse_m = a.n ? std::sqrt(a.sum_sq / static_cast<double>(a.n)) : 0.0;
    e.max_m = a.max;
    if (stats && stats->zones_total)
      e.valid_fraction =
          static_cast<double>(stats->zones_valid) / static_cast<double>(stats->zones_total);
    return e;
  };

  EvalReport report;
  report.global = entry_of(global, nullptr);
  report.global.valid_fraction = cloud.valid_fraction();
  for (const auto& [idx, acc] : per_sensor) {
    const auto it = cloud.per_sensor.find(idx);
    report.per_sensor[idx] =
        entry_of(acc, it != cloud.per_sensor.end() ? &it->second : nullptr);
  }
  // sensors that saw frames but produced no valid points still get a row
  for (const auto& [idx, stats] : cloud.per_sensor)
    if (!report.per_sensor.count(idx)) report.per_sensor[idx] = entry_of(Acc{}, &stats);
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  auto fill = [](nlohmann::ordered_json& row, const EvalEntry& e) {
    row["points"] = e.points;
    row["rmse_m"] = e.rmse_m;
    row["max_m"] = e.max_m;
    row["valid_fraction"] = e.valid_fraction;
  };
  fill(j["global"], report.global);
  j["per_sensor"] = nlohmann::ordered_json::array();
  for (const auto& [idx, e] : report.per_sensor) {
    nlohmann::ordered_json row;
    row["sensor"] = idx;
    fill(row, e);
    j["per_sensor"].push_back(std::move(row));
  }
  return j;
}

}  // namespace tofskin

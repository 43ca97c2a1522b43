#include "tofskin/manifest.hpp"

#include "tofskin/errors.hpp"
#include "json_io.hpp"

namespace tofskin {

const SensorRecord* SensorManifest::find(int index) const {
  for (const auto& s : sensors)
    if (s.index == index) return &s;
  return nullptr;
}

FrustumModel SensorManifest::frustum_of(const SensorRecord& rec, double min_range,
                                        double max_range) const {
  FrustumModel model;
  model.fov_diag_deg = rec.fov_diag_deg;
  model.rows = rec.rows;
  model.cols = rec.cols;
  model.min_range = min_range;
  model.max_range = max_range;
  return model;
}

SensorManifest build_manifest(const std::vector<SurfaceSample>& samples,
                              const PcbFootprint& pcb, const FrustumModel& frustum,
                              const std::string& link_name,
                              const std::optional<SkinParams>& skin) {
  if (samples.size() > 256)
    throw ValidationError("too many samples for 8-bit sensor indices: " +
                          std::to_string(samples.size()));
  validate(frustum);

  SensorManifest manifest;
  manifest.link_name = link_name;
  const double lift = skin ? skin->gap + skin->thickness : 0.0;
  if (skin) {
    manifest.gap = skin->gap;
    manifest.thickness = skin->thickness;
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SensorRecord rec;
    rec.index = static_cast<int>(i);
    rec.mount = mount_frame(samples[i]);
    rec.mount.translation += lift * samples[i].normal.normalized();
    rec.fov_diag_deg = frustum.fov_diag_deg;
    rec.rows = frustum.rows;
    rec.cols = frustum.cols;
    rec.pcb_extents = Vec3(pcb.width, pcb.height, pcb.depth);
    manifest.sensors.push_back(rec);
  }
  return manifest;
}

void save_manifest(const SensorManifest& manifest, const std::filesystem::path& path) {
  detail::Json j;
  j["version"] = manifest.version;
  j["link_name"] = manifest.link_name;
  j["skin_params"] = {{"gap_m", manifest.gap}, {"thickness_m", manifest.thickness}};
  if (!manifest.meta.is_null()) j["meta"] = manifest.meta;
  j["sensors"] = detail::Json::array();
  for (const auto& s : manifest.sensors) {
    detail::Json sj;
    sj["index"] = s.index;
    sj["origin_m"] = detail::to_json(s.mount.translation);
    sj["rotation_rowmajor"] = detail::rowmajor(s.mount.rotation);
    sj["fov_diag_deg"] = s.fov_diag_deg;
    sj["grid"] = {s.rows, s.cols};
    sj["pcb_m"] = detail::to_json(s.pcb_extents);
    j["sensors"].push_back(std::move(sj));
  }
  detail::save_json_file(j, path, "manifest");
}

SensorManifest load_manifest(const std::filesystem::path& path) {
  const auto j = detail::load_json_file(path, "manifest");
  SensorManifest manifest;
  try {
    manifest.version = j.at("version").get<int>();
    manifest.link_name = j.at("link_name").get<std::string>();
    manifest.gap = j.at("skin_params").at("gap_m").get<double>();
    manifest.thickness = j.at("skin_params").at("thickness_m").get<double>();
    if (j.contains("meta")) manifest.meta = j["meta"];
    for (const auto& sj : j.at("sensors")) {
      SensorRecord rec;
      rec.index = sj.at("index").get<int>();
      rec.mount.translation = detail::vec3_from(sj.at("origin_m"), "origin_m");
      rec.mount.rotation = detail::checked_rotation(
          detail::mat3_rowmajor_from(sj.at("rotation_rowmajor"), "rotation_rowmajor"),
          "sensor rotation");
      rec.fov_diag_deg = sj.at("fov_diag_deg").get<double>();
      const auto& grid = sj.at("grid");
      if (!grid.is_array() || grid.size() != 2)
        throw FormatError("sensor grid must be [rows, cols]");
      rec.rows = grid[0].get<int>();
      rec.cols = grid[1].get<int>();
      rec.pcb_extents = detail::vec3_from(sj.at("pcb_m"), "pcb_m");
      manifest.sensors.push_back(rec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid manifest (" + path.string() + "): " + e.what());
  }
  return manifest;
}

}  // namespace tofskin

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tofskin/frustum.hpp"
#include "tofskin/placement.hpp"
#include "tofskin/shell.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

// One sensor as recorded at design time: index, mount pose on the link, and
// the imaging parameters consumers need to project its readings.
struct SensorRecord {
  int index = 0;
  Pose mount;  // link frame; z points outward
  double fov_diag_deg = 65.0;
  int rows = 8;
  int cols = 8;
  Vec3 pcb_extents = Vec3::Zero();  // [w, h, d] meters, without clearance
};

// The design-time record that replaces physical calibration. Reconstruction
// needs nothing else about sensor geometry.
struct SensorManifest {
  int version = 1;
  std::string link_name;
  double gap = 0.0;
  double thickness = 0.0;
  std::vector<SensorRecord> sensors;
  nlohmann::ordered_json meta;  // reproducibility record; preserved verbatim

  const SensorRecord* find(int index) const;
  FrustumModel frustum_of(const SensorRecord& rec, double min_range = 0.0,
                          double max_range = 4.0) const;
};

// Sensors numbered 0..n-1 in sampling order. When skin params are given the
// mount origins are lifted by gap+thickness along the sample normal so they
// sit on the printed outer surface.
SensorManifest build_manifest(const std::vector<SurfaceSample>& samples,
                              const PcbFootprint& pcb, const FrustumModel& frustum,
                              const std::string& link_name,
                              const std::optional<SkinParams>& skin = std::nullopt);

void save_manifest(const SensorManifest& manifest, const std::filesystem::path& path);
SensorManifest load_manifest(const std::filesystem::path& path);

}  // namespace tofskin

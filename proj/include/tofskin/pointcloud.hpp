#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tofskin/kinematics.hpp"
#include "tofskin/manifest.hpp"
#include "tofskin/scene.hpp"
#include "tofskin/telemetry.hpp"
#include "tofskin/types.hpp"

namespace tofskin {

struct CloudPoint {
  Vec3 position;  // world frame, meters
  std::uint8_t sensor_index = 0;
  std::uint8_t row = 0;
  std::uint8_t col = 0;
  std::uint16_t range_mm = 0;
  std::uint64_t timestamp_us = 0;
};

struct SensorZoneStats {
  std::uint64_t frames = 0;
  std::uint64_t zones_total = 0;
  std::uint64_t zones_valid = 0;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  std::map<int, SensorZoneStats> per_sensor;
  std::uint64_t frames_in = 0;
  std::uint64_t frames_dropped_unknown_sensor = 0;

  std::uint64_t zones_total() const;
  std::uint64_t zones_valid() const;
  double valid_fraction() const;
};

struct AssembleOptions {
  double min_range = 0.0;
  double max_range = 4.0;
};

// World-frame points: per zone project_zone in the sensor frame, then
// compose(forward_kinematics(chain, q, link), mount). Sentinel and
// out-of-range zones are skipped and counted; frames with a sensor index
// absent from the manifest are dropped and counted. Points are ordered by
// (sensor_index, sequence, zone).
PointCloud assemble(std::span<const ToFFrame> frames, const SensorManifest& manifest,
                    const KinematicChain& chain, const JointState& q,
                    const AssembleOptions& options = {});

// Fixed palette indexed by sensor_index mod 8.
const std::array<std::array<std::uint8_t, 3>, 8>& sensor_palette();

// PLY with float x,y,z and uchar red,green,blue per vertex. Header comments
// carry the reproducibility record plus per-sensor zone statistics so a
// written cloud can be re-scored without the original frames.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               const std::vector<std::string>& comments = {}, bool binary = false);

// Reads clouds written by write_ply (ASCII or binary little-endian). Sensor
// indices are recovered from the palette, zone statistics from the header
// comments when present.
PointCloud read_ply_cloud(const std::filesystem::path& path);

struct EvalEntry {
  std::uint64_t points = 0;
  double rmse_m = 0.0;
  double max_m = 0.0;
  double valid_fraction = 0.0;
};

struct EvalReport {
  EvalEntry global;
  std::map<int, EvalEntry> per_sensor;
};

// Distance of every point to the nearest primitive surface, aggregated per
// sensor and globally. Safe on empty clouds.
EvalReport evaluate(const PointCloud& cloud, const Scene& scene);

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace tofskin

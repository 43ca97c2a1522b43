#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tofskin/types.hpp"

namespace tofskin {

// Multizone ToF imager: rows x cols viewing rays inside a square frustum
// given by its diagonal field of view. Sensor frame: z = boresight,
// x = +column, y = +row; zone (0,0) is the grid corner at negative x,y.
struct FrustumModel {
  double fov_diag_deg = 65.0;
  int rows = 8;
  int cols = 8;
  double min_range = 0.0;  // meters
  double max_range = 4.0;  // meters
};

void validate(const FrustumModel& model);

struct ZoneRay {
  int row = 0;
  int col = 0;
  Vec3 direction = Vec3::UnitZ();  // unit, sensor frame
};

// Half-extent of the square grid on the unit-focal plane.
double grid_half_extent(const FrustumModel& model);

ZoneRay zone_direction(const FrustumModel& model, int row, int col);

// All rows*cols rays, row-major.
std::vector<ZoneRay> zone_rays(const FrustumModel& model);

// Sensor-frame point for one reading; nullopt for the sentinel or a range
// outside [min_range, max_range].
std::optional<Vec3> project_zone(const ZoneRay& ray, std::uint16_t range_mm,
                                 const FrustumModel& model);

}  // namespace tofskin

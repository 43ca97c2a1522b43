#include "tofskin/frustum.hpp"

#include <cmath>
#include <numbers>

#include "tofskin/errors.hpp"

namespace tofskin {

void validate(const FrustumModel& model) {
  if (!(model.fov_diag_deg > 0.0 && model.fov_diag_deg < 180.0))
    throw ValidationError("fov_diag_deg must be in (0, 180)");
  if (model.rows < 1 || model.cols < 1)
    throw ValidationError("grid must be at least 1x1");
  if (!(model.max_range > model.min_range) || model.min_range < 0.0)
    throw ValidationError("require max_range > min_range >= 0");
}

double grid_half_extent(const FrustumModel& model) {
  const double half = 0.5 * model.fov_diag_deg * std::numbers::pi / 180.0;
  return std::tan(half) / std::numbers::sqrt2;
}

ZoneRay zone_direction(const FrustumModel& model, int row, int col) {
  validate(model);
  if (row < 0 || row >= model.rows || col < 0 || col >= model.cols)
    throw ValidationError("zone index out of range");
  const double w = grid_half_extent(model);
  const double u = w * ((2.0 * col + 1.0) / model.cols - 1.0);
  const double v = w * ((2.0 * row + 1.0) / model.rows - 1.0);
  return {row, col, Vec3(u, v, 1.0).normalized()};
}

std::vector<ZoneRay> zone_rays(const FrustumModel& model) {
  validate(model);
  std::vector<ZoneRay> rays;
  rays.reserve(static_cast<std::size_t>(model.rows) * model.cols);
  for (int r = 0; r < model.rows; ++r)
    for (int c = 0; c < model.cols; ++c) rays.push_back(zone_direction(model, r, c));
  return rays;
}

std::optional<Vec3> project_zone(const ZoneRay& ray, std::uint16_t range_mm,
                                 const FrustumModel& model) {
  if (range_mm == kRangeSentinel) return std::nullopt;
  const double range = range_mm * 1e-3;
  if (range < model.min_range || range > model.max_range) return std::nullopt;
  return range * ray.direction;
}

}  // namespace tofskin

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fixtures.hpp"
#include "tofskin/errors.hpp"
#include "tofskin/pointcloud.hpp"

using namespace tofskin;

namespace {

KinematicChain identity_chain() {
  KinematicChain chain;
  chain.links.push_back({"base", Pose{}, Vec3::UnitZ(), JointType::fixed});
  return chain;
}

SensorManifest manifest_of(int sensor_count, double spacing = 0.05) {
  SensorManifest m;
  m.link_name = "base";
  for (int i = 0; i < sensor_count; ++i) {
    SensorRecord rec;
    rec.index = i;
    rec.mount.translation = Vec3(spacing * i, 0, 0);
    m.sensors.push_back(rec);
  }
  return m;
}

Scene transformed(const Scene& scene, const Pose& q) {
  Scene out;
  for (const auto& prim : scene.primitives) {
    if (const auto* s = std::get_if<Sphere>(&prim))
      out.primitives.emplace_back(Sphere{apply(q, s->center), s->radius});
    else if (const auto* b = std::get_if<OrientedBox>(&prim))
      out.primitives.emplace_back(OrientedBox{compose(q, b->pose), b->extents});
    else if (const auto* p = std::get_if<Plane>(&prim))
      out.primitives.emplace_back(Plane{apply(q, p->point), q.rotation * p->normal});
  }
  return out;
}

}  // namespace

TEST_CASE("all-sentinel frames assemble to an empty cloud") {
  ToFFrame f;
  f.ranges_mm.fill(kRangeSentinel);
  const auto cloud = assemble(std::vector<ToFFrame>{f, f}, manifest_of(1), identity_chain(), {{}});
  CHECK(cloud.points.empty());
  CHECK(cloud.valid_fraction() == 0.0);
  CHECK(cloud.zones_total() == 128);
  CHECK(cloud.per_sensor.at(0).frames == 2);
}

TEST_CASE("identity chain and mount reproduce the frustum projection") {
  ToFFrame f;
  f.ranges_mm.fill(kRangeSentinel);
  f.ranges_mm[0] = 1000;  // zone (0,0)
  const auto cloud = assemble(std::vector<ToFFrame>{f}, manifest_of(1), identity_chain(), {{}});
  REQUIRE(cloud.points.size() == 1);
  const Vec3 p = cloud.points[0].position;
  CHECK(p.x() == doctest::Approx(-0.34429).epsilon(2e-5));
  CHECK(p.y() == doctest::Approx(-0.34429).epsilon(2e-5));
  CHECK(p.z() == doctest::Approx(0.87346).epsilon(2e-5));
  CHECK(cloud.points[0].row == 0);
  CHECK(cloud.points[0].col == 0);
  CHECK(cloud.points[0].range_mm == 1000);
}

TEST_CASE("point count equals the valid zone count; unknown sensors are dropped") {
  ToFFrame good;
  good.sensor_index = 0;
  good.ranges_mm.fill(500);
  good.ranges_mm[10] = kRangeSentinel;
  good.ranges_mm[20] = 4200;  // beyond 4 m default
  ToFFrame stranger;
  stranger.sensor_index = 9;
  stranger.ranges_mm.fill(500);

  const auto cloud = assemble(std::vector<ToFFrame>{good, stranger}, manifest_of(1),
                              identity_chain(), {{}});
  CHECK(cloud.points.size() == 62);
  CHECK(cloud.zones_valid() == 62);
  CHECK(cloud.frames_dropped_unknown_sensor == 1);
  CHECK(cloud.valid_fraction() == doctest::Approx(62.0 / 64.0));
}

TEST_CASE("noise-free simulated capture lands on the sphere surface") {
  Scene scene;
  scene.primitives.emplace_back(Sphere{{0.05, 0, 0.5}, 0.2});
  const auto manifest = manifest_of(3);
  const auto chain = identity_chain();
  const auto frames = simulate_capture(scene, manifest, chain, {{}}, 4, 15.0, {});
  const auto cloud = assemble(frames, manifest, chain, {{}});
  REQUIRE(cloud.points.size() > 100);
  for (const auto& p : cloud.points) {
    const double err = std::abs((p.position - Vec3(0.05, 0, 0.5)).norm() - 0.2);
    CHECK(err <= 0.5e-3 + 1e-9);  // half-millimeter quantization
  }
}

TEST_CASE("points are ordered by sensor, sequence, zone regardless of arrival") {
  Scene scene;
  scene.primitives.emplace_back(Plane{{0, 0, 1}, {0, 0, 1}});
  const auto manifest = manifest_of(2);
  const auto chain = identity_chain();
  auto frames = simulate_capture(scene, manifest, chain, {{}}, 2, 15.0, {});
  const auto ordered = assemble(frames, manifest, chain, {{}});
  std::reverse(frames.begin(), frames.end());
  const auto shuffled = assemble(frames, manifest, chain, {{}});
  REQUIRE(ordered.points.size() == shuffled.points.size());
  for (std::size_t i = 0; i < ordered.points.size(); ++i)
    CHECK((ordered.points[i].position - shuffled.points[i].position).norm() == 0.0);
}

TEST_CASE("PLY round trip preserves positions, colors, and zone stats") {
  fixtures::TempDir dir;
  Scene scene;
  scene.primitives.emplace_back(Plane{{0, 0, 0.8}, {0, 0, 1}});
  const auto manifest = manifest_of(9);  // exercise palette modulo
  const auto chain = identity_chain();
  const auto frames = simulate_capture(scene, manifest, chain, {{}}, 1, 15.0, {});
  const auto cloud = assemble(frames, manifest, chain, {{}});

  write_ply(cloud, dir.file("ascii.ply"), {"seed=7"}, false);
  write_ply(cloud, dir.file("binary.ply"), {"seed=7"}, true);
  const PointCloud ascii = read_ply_cloud(dir.file("ascii.ply"));
  const PointCloud binary = read_ply_cloud(dir.file("binary.ply"));
  REQUIRE(ascii.points.size() == cloud.points.size());
  REQUIRE(binary.points.size() == cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    // within float round-trip of the original double positions
    const Vec3& orig = cloud.points[i].position;
    CHECK((ascii.points[i].position - orig).norm() <= 1.2e-7 * orig.norm() + 1e-9);
    // ASCII text and raw binary must decode to the same floats
    CHECK((ascii.points[i].position - binary.points[i].position).norm() == 0.0);
    CHECK(ascii.points[i].sensor_index == cloud.points[i].sensor_index % 8);
    CHECK(binary.points[i].sensor_index == cloud.points[i].sensor_index % 8);
  }
  for (const PointCloud* back : {&ascii, &binary}) {
    CHECK(back->per_sensor.at(3).zones_total == 64);
    CHECK(back->per_sensor.at(3).zones_valid == cloud.per_sensor.at(3).zones_valid);
  }
}

TEST_CASE("empty cloud writes a valid PLY") {
  fixtures::TempDir dir;
  write_ply(PointCloud{}, dir.file("empty.ply"));
  const PointCloud back = read_ply_cloud(dir.file("empty.ply"));
  CHECK(back.points.empty());
}

TEST_CASE("palette is a pure function of sensor index") {
  const auto& palette = sensor_palette();
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) CHECK(palette[i] != palette[j]);
}

TEST_CASE("evaluate: exact points score zero, offsets score their distance") {
  Scene scene;
  scene.primitives.emplace_back(Sphere{{0, 0, 0}, 0.5});
  PointCloud cloud;
  for (int i = 0; i < 10; ++i) {
    CloudPoint p;
    p.position = 0.5 * Vec3(std::sin(i * 0.5), std::cos(i * 0.5), std::sin(i * 0.2 + 1))
                           .normalized();
    cloud.points.push_back(p);
  }
  const EvalReport exact = evaluate(cloud, scene);
  CHECK(exact.global.rmse_m < 1e-12);
  CHECK(exact.global.max_m < 1e-12);

  Scene plane;
  plane.primitives.emplace_back(Plane{{0, 0, 0}, {0, 0, 1}});
  PointCloud one;
  CloudPoint p;
  p.position = Vec3(0.3, -0.2, 0.001);
  one.points.push_back(p);
  const EvalReport off = evaluate(one, plane);
  CHECK(off.global.rmse_m == doctest::Approx(0.001));
  CHECK(off.global.max_m == doctest::Approx(0.001));
  CHECK(off.global.points == 1);
}

TEST_CASE("evaluation is invariant under a common rigid motion") {
  Scene scene;
  scene.primitives.emplace_back(Sphere{{0.1, -0.05, 0.6}, 0.15});
  scene.primitives.emplace_back(Plane{{0, 0, 1.0}, {0, 0, 1}});
  const auto manifest = manifest_of(4);
  const auto chain = identity_chain();
  const auto frames = simulate_capture(scene, manifest, chain, {{}}, 2, 15.0, {});
  const auto report_a = evaluate(assemble(frames, manifest, chain, {{}}), scene);

  const Pose q = compose(translation_of({0.3, -0.7, 0.2}),
                         rotation_about(Vec3(1, 2, 3).normalized(), 1.1));
  KinematicChain moved = chain;
  moved.links[0].fixed_pose = q;
  const auto report_b = evaluate(assemble(frames, manifest, moved, {{}}), transformed(scene, q));

  CHECK(report_a.global.points == report_b.global.points);
  CHECK(std::abs(report_a.global.rmse_m - report_b.global.rmse_m) < 1e-9);
  CHECK(std::abs(report_a.global.max_m - report_b.global.max_m) < 1e-9);
  for (const auto& [idx, ea] : report_a.per_sensor) {
    const auto& eb = report_b.per_sensor.at(idx);
    CHECK(std::abs(ea.rmse_m - eb.rmse_m) < 1e-9);
    CHECK(std::abs(ea.max_m - eb.max_m) < 1e-9);
  }
}

TEST_CASE("evaluate guards its preconditions") {
  CHECK_THROWS_AS(evaluate(PointCloud{}, Scene{}), ValidationError);

  Scene scene;
  scene.primitives.emplace_back(Sphere{{0, 0, 0}, 1.0});
  const EvalReport empty = evaluate(PointCloud{}, scene);  // zero-division safe
  CHECK(empty.global.points == 0);
  CHECK(empty.global.rmse_m == 0.0);
  CHECK(empty.global.valid_fraction == 0.0);
}

TEST_CASE("eval report serializes with stable fields") {
  Scene scene;
  scene.primitives.emplace_back(Sphere{{0, 0, 0}, 1.0});
  PointCloud cloud;
  CloudPoint p;
  p.position = Vec3(1.001, 0, 0);
  p.sensor_index = 2;
  cloud.points.push_back(p);
  cloud.per_sensor[2] = {1, 64, 1};
  const auto j = to_json(evaluate(cloud, scene));
  CHECK(j["global"]["points"] == 1);
  CHECK(j["global"]["rmse_m"].get<double>() == doctest::Approx(0.001));
  CHECK(j["per_sensor"][0]["sensor"] == 2);
  CHECK(j["per_sensor"][0]["valid_fraction"].get<double>() ==
        doctest::Approx(1.0 / 64.0));
}

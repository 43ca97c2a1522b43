#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "tofskin/errors.hpp"
#include "tofskin/placement.hpp"
#include "tofskin/rng.hpp"

using namespace tofskin;

TEST_CASE("disk larger than the domain yields exactly one sample") {
  TriMesh tri;
  tri.vertices = {{0, 0, 0}, {0.001, 0, 0}, {0, 0.001, 0}};
  tri.triangles = {{0, 1, 2}};
  compute_normals(tri);
  const auto samples = sample_poisson(tri, fixtures::all_faces(tri),
                                      {0.1, 42, 200});
  CHECK(samples.size() == 1);
}

TEST_CASE("paper-footprint rectangle: separation holds exactly, count is plausible") {
  const TriMesh rect = fixtures::rect_patch(0.28, 0.104, 28, 10);
  const auto region = fixtures::all_faces(rect);
  int at_least_8 = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto samples = sample_poisson(rect, region, {0.045, seed, 10000});
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j)
        CHECK((samples[i].position - samples[j].position).norm() >= 0.045);
    CHECK(samples.size() >= 6);
    CHECK(samples.size() <= 24);
    at_least_8 += samples.size() >= 8;
  }
  CHECK(at_least_8 >= 19);
}

TEST_CASE("samples sit on their faces with the face normal") {
  const TriMesh rect = fixtures::rect_patch(0.28, 0.104, 28, 10);
  const auto samples = sample_poisson(rect, fixtures::all_faces(rect), {0.05, 3, 5000});
  for (const auto& s : samples) {
    CHECK(s.face_index >= 0);
    CHECK(s.face_index < static_cast<int>(rect.triangles.size()));
    CHECK(std::abs(s.position.z()) < 1e-12);  // flat fixture
    CHECK((s.normal - Vec3(0, 0, 1)).norm() < 1e-12);
    CHECK(s.position.x() >= -1e-12);
    CHECK(s.position.x() <= 0.28 + 1e-12);
  }
}

TEST_CASE("sampling is deterministic per seed and varies across seeds") {
  const TriMesh rect = fixtures::rect_patch(0.2, 0.1, 20, 10);
  const auto region = fixtures::all_faces(rect);
  const PlacementConfig cfg{0.03, 1234, 4000};
  const auto a = sample_poisson(rect, region, cfg);
  const auto b = sample_poisson(rect, region, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].face_index == b[i].face_index);
  }
  const auto c = sample_poisson(rect, region, {0.03, 1235, 4000});
  bool different = c.size() != a.size();
  for (std::size_t i = 0; !different && i < a.size(); ++i)
    different = (a[i].position - c[i].position).norm() > 1e-15;
  CHECK(different);
}

TEST_CASE("area uniformity: halves of a rectangle collect equal counts") {
  const TriMesh rect = fixtures::rect_patch(0.2, 0.1, 20, 10);
  const auto region = fixtures::all_faces(rect);
  std::uint64_t total = 0, left = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& s : sample_poisson(rect, region, {0.02, seed, 2000})) {
      ++total;
      left += s.position.x() < 0.1;
    }
  }
  const double sigma = 0.5 * std::sqrt(static_cast<double>(total));
  CHECK(std::abs(static_cast<double>(left) - 0.5 * total) < 4.0 * sigma);
}

TEST_CASE("empty or invalid regions are rejected") {
  const TriMesh rect = fixtures::rect_patch(0.1, 0.1, 2, 2);
  CHECK_THROWS_AS(sample_poisson(rect, {}, {0.01, 0, 100}), ValidationError);
  const std::vector<int> bad = {999};
  CHECK_THROWS_AS(sample_poisson(rect, bad, {0.01, 0, 100}), ValidationError);
  const auto region = fixtures::all_faces(rect);
  CHECK_THROWS_AS(sample_poisson(rect, region, {0.0, 0, 100}), ValidationError);
  CHECK_THROWS_AS(sample_poisson(rect, region, {0.01, 0, 0}), ValidationError);
}

TEST_CASE("mount frame axis permutations") {
  // boresight up: identity frame
  const Pose up = mount_frame({{0.5, 0.5, 0}, {0, 0, 1}, 0});
  CHECK((up.rotation - Mat3::Identity()).norm() < 1e-15);

  // normal +x: frame built from global Y
  const Pose px = mount_frame({Vec3::Zero(), {1, 0, 0}, 0});
  CHECK((px.rotation.col(0) - Vec3(0, 1, 0)).norm() < 1e-15);
  CHECK((px.rotation.col(1) - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK((px.rotation.col(2) - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK(px.rotation.determinant() == doctest::Approx(1.0));
}

TEST_CASE("mount frames are special orthogonal for random normals") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    Vec3 n;
    do {
      n = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    } while (n.norm() < 1e-3);
    n.normalize();
    const Pose frame = mount_frame({Vec3::Zero(), n, 0});
    CHECK((frame.rotation.transpose() * frame.rotation - Mat3::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK(frame.rotation.determinant() > 0.0);
    CHECK((frame.rotation.col(2) - n).norm() < 1e-9);
  }
}

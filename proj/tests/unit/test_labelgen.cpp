#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "radarseg/labelgen.hpp"
#include "radarseg/simworld.hpp"

using namespace radarseg;
using namespace radarseg::labels;

namespace {

std::vector<int> to_ints(const OccupancyGrid& g) {
  return {g.cells().begin(), g.cells().end()};
}

// Column scan written out longhand: first set row, or rows if none.
std::size_t first_occupied(const OccupancyGrid& g, std::size_t col) {
  std::size_t r = 0;
  while (r < g.rows() && g(r, col) == 0) ++r;
  return r;
}

OccupancyGrid random_grid(std::mt19937_64& rng, double p) {
  std::bernoulli_distribution b(p);
  OccupancyGrid g;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) g.set(r, c, b(rng));
  }
  return g;
}

double iou(const FovLabel& a, const FovLabel& b) {
  std::size_t i = 0, u = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    i += a.cells()[k] && b.cells()[k];
    u += a.cells()[k] || b.cells()[k];
  }
  return u ? double(i) / double(u) : 1.0;
}

}  // namespace

TEST_CASE("filter_points keeps exactly the in-band subset in order") {
  FilterParams fp;
  LidarFrame floor;
  for (int i = 0; i < 10; ++i) floor.points.push_back({double(i), 0.0, 0.0, 50.0});
  CHECK(filter_points(floor, fp).points.empty());

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> z(-0.5, 3.5), in(0.0, 100.0);
  LidarFrame mixed;
  for (int i = 0; i < 500; ++i) mixed.points.push_back({double(i), 1.0, z(rng), in(rng)});
  fp.intensity_min = 30.0;
  const auto out = filter_points(mixed, fp);
  std::vector<double> expected;
  for (const auto& p : mixed.points) {
    if (!(p.z < 0.2) && !(p.z > 2.0) && !(p.intensity < 30.0)) expected.push_back(p.x);
  }
  REQUIRE(out.points.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(out.points[i].x == expected[i]);

  fp.intensity_min = 0.0;
  std::size_t height_only = 0;
  for (const auto& p : mixed.points) height_only += p.z >= 0.2 && p.z <= 2.0;
  CHECK(filter_points(mixed, fp).points.size() == height_only);

  const FilterParams inverted{.z_min = 2.0, .z_max = 1.0};
  CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
}

TEST_CASE("accumulate_global applies the pose and drops z") {
  const FilterParams fp;
  LidarFrame f;
  f.points = {{1.0, 0.0, 1.0, 10}, {2.5, -1.0, 0.5, 10}, {0.3, 4.0, 1.9, 10}};

  const LidarFrame one[] = {f};
  {
    const PoseSE3 id[] = {PoseSE3{}};
    const auto cloud = accumulate_global(one, id, 2, fp);
    REQUIRE(cloud.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(cloud.points[i].x == f.points[i].x);
      CHECK(cloud.points[i].y == f.points[i].y);
    }
  }
  {
    const PoseSE3 shift[] = {PoseSE3::from_yaw(1.0, 0.0, 0.0)};
    const auto cloud = accumulate_global(one, shift, 2, fp);
    for (std::size_t i = 0; i < 3; ++i) CHECK(cloud.points[i].x == f.points[i].x + 1.0);
  }
  {
    LidarFrame unit;
    unit.points = {{1.0, 0.0, 1.0, 10}};
    const LidarFrame frames[] = {unit};
    const PoseSE3 quarter[] = {PoseSE3::from_yaw(0.0, 0.0, std::numbers::pi / 2)};
    const auto cloud = accumulate_global(frames, quarter, 2, fp);
    CHECK(std::abs(cloud.points[0].x - 0.0) <= 1e-12);
    CHECK(std::abs(cloud.points[0].y - 1.0) <= 1e-12);
  }
}

TEST_CASE("accumulate_global covers ceil(m / s) frames") {
  const FilterParams fp;
  for (std::size_t m : {1u, 5u, 9u, 10u, 23u}) {
    std::vector<LidarFrame> frames(m);
    std::vector<PoseSE3> poses(m);
    for (std::size_t k = 0; k < m; ++k) frames[k].points = {{double(k), 0.0, 1.0, 1.0}};
    for (std::size_t s = 2; s <= 10; ++s) {
      const auto cloud = accumulate_global(frames, poses, s, fp);
      CHECK(cloud.points.size() == (m + s - 1) / s);
      for (std::size_t i = 0; i < cloud.points.size(); ++i) CHECK(cloud.points[i].x == double(i * s));
    }
  }
  std::vector<LidarFrame> frames(3);
  std::vector<PoseSE3> poses(2);
  CHECK_THROWS_AS(accumulate_global(frames, poses, 2, fp), std::invalid_argument);
  poses.resize(3);
  CHECK_THROWS_AS(accumulate_global(frames, poses, 1, fp), std::invalid_argument);
  CHECK_THROWS_AS(accumulate_global(frames, poses, 11, fp), std::invalid_argument);
}

TEST_CASE("to_polar_ram converts into the sensor frame and crops") {
  GlobalCloud cloud;
  cloud.points = {{6.0, 0.0}, {-3.0, 0.0}, {13.0, 0.0}, {1.0, 2.0}};
  const auto polar = to_polar_ram(cloud, PoseSE3{});
  REQUIRE(polar.size() == 1);
  CHECK(polar[0].range_m == 6.0);
  CHECK(polar[0].azimuth_deg == 0.0);

  // Random cloud around a rotated, translated sensor: polar back to
  // Cartesian reproduces the sensor-frame coordinates.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-15.0, 15.0);
  const PoseSE3 pose = PoseSE3::from_yaw(1.5, -2.0, 0.7);
  GlobalCloud rc;
  for (int i = 0; i < 2000; ++i) rc.points.push_back({u(rng), u(rng)});
  const auto pr = to_polar_ram(rc, pose);
  REQUIRE(pr.size() > 100);
  std::size_t j = 0;
  for (const auto& p : rc.points) {
    const Eigen::Vector2d b = Eigen::Rotation2Dd(-0.7) * Eigen::Vector2d(p.x - 1.5, p.y + 2.0);
    const double r = b.norm(), az = std::atan2(b.y(), b.x()) * 180.0 / std::numbers::pi;
    if (r > 12.0 || std::abs(az) > 45.0) continue;
    REQUIRE(j < pr.size());
    const double t = pr[j].azimuth_deg * std::numbers::pi / 180.0;
    CHECK(std::abs(pr[j].range_m * std::cos(t) - b.x()) <= 1e-9);
    CHECK(std::abs(pr[j].range_m * std::sin(t) - b.y()) <= 1e-9);
    ++j;
  }
  CHECK(j == pr.size());
}

TEST_CASE("rasterize_occupancy thresholds the per-cell count") {
  const std::size_t tau = 3;
  std::vector<PolarPoint> pts;
  for (std::size_t i = 0; i < tau; ++i) pts.push_back({6.0 + 0.01 * double(i), 0.1});
  for (std::size_t i = 0; i + 1 < tau; ++i) pts.push_back({2.0, -30.0});
  const auto g = rasterize_occupancy(pts, tau);
  CHECK(g(64, 64) == 1);
  CHECK(g(21, 21) == 0);
  CHECK(g.count() == 1);
  CHECK(rasterize_occupancy(std::vector<PolarPoint>{}, 1).count() == 0);
  CHECK_THROWS_AS(rasterize_occupancy(pts, 0), std::invalid_argument);

  // Clamping at the far edge and both azimuth limits.
  const std::vector<PolarPoint> edge = {{12.0, 45.0}, {0.0, -45.0}};
  const auto e = rasterize_occupancy(edge, 1);
  CHECK(e(127, 127) == 1);
  CHECK(e(0, 0) == 1);
}

TEST_CASE("occupancy is monotone in tau") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> r(0.0, 12.0), a(-45.0, 45.0);
  std::vector<PolarPoint> pts;
  for (int i = 0; i < 40000; ++i) pts.push_back({r(rng), a(rng)});
  OccupancyGrid prev = rasterize_occupancy(pts, 1);
  for (std::size_t tau = 2; tau <= 8; ++tau) {
    const auto g = rasterize_occupancy(pts, tau);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.cells()[i] <= prev.cells()[i]);
    prev = g;
  }
}

TEST_CASE("erode matches brute-force morphology") {
  OccupancyGrid single;
  single.set(40, 40, true);
  CHECK(erode(single).count() == 0);

  OccupancyGrid block;
  for (std::size_t r = 10; r < 15; ++r) {
    for (std::size_t c = 20; c < 25; ++c) block.set(r, c, true);
  }
  const auto eb = erode(block);
  CHECK(eb.count() == 9);
  for (std::size_t r = 11; r < 14; ++r) {
    for (std::size_t c = 21; c < 24; ++c) CHECK(eb(r, c) == 1);
  }
  CHECK(erode(OccupancyGrid{}) == OccupancyGrid{});
  CHECK(erode(block, 0) == block);

  std::mt19937_64 rng(5);
  for (double p : {0.5, 0.8, 0.95}) {
    const auto g = random_grid(rng, p);
    const auto expect2 = oracle::erode3x3(oracle::erode3x3(to_ints(g), 128, 128), 128, 128);
    CHECK(to_ints(erode(g, 2)) == expect2);
  }
  // Border cells never survive.
  const auto full = erode(OccupancyGrid(128, 128, 1));
  CHECK(full.count() == 126u * 126u);
}

TEST_CASE("fov_label: nearest obstacle per column governs") {
  CHECK(fov_label(OccupancyGrid{}).count() == 128u * 128u);

  OccupancyGrid g;
  g.set(10, 5, true);
  g.set(30, 7, true);
  g.set(50, 7, true);
  const auto label = fov_label(g);
  for (std::size_t r = 0; r < 128; ++r) {
    CHECK(label(r, 5) == (r < 10 ? 1 : 0));
    CHECK(label(r, 7) == (r < 30 ? 1 : 0));
  }

  std::mt19937_64 rng(6);
  for (double p : {0.01, 0.05, 0.3}) {
    const auto rg = random_grid(rng, p);
    const auto l = fov_label(rg);
    CHECK(columns_monotone(l));
    for (std::size_t c = 0; c < 128; ++c) {
      const std::size_t first = first_occupied(rg, c);
      for (std::size_t r = 0; r < 128; ++r) CHECK(l(r, c) == (r < first ? 1 : 0));
    }
  }
}

TEST_CASE("fov_label is idempotent through its own boundary") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const auto l = fov_label(random_grid(rng, 0.02));
    CHECK(fov_label(obstacles_from_label(l)) == l);
  }
}

TEST_CASE("label_qc reports free fraction and monotonicity") {
  const auto all = label_qc(FovLabel(128, 128, 1));
  CHECK(all.free_fraction == 1.0);
  CHECK(all.monotone_ok);

  FovLabel checker;
  for (std::size_t r = 0; r < 128; ++r) {
    for (std::size_t c = 0; c < 128; ++c) checker.set(r, c, (r + c) % 2 == 0);
  }
  const auto q = label_qc(checker);
  CHECK(q.free_fraction == 0.5);
  CHECK_FALSE(q.monotone_ok);

  for (auto cls : sim::kAllSceneClasses) {
    const auto scene = sim::build_scene(cls, 41);
    for (const auto& st : sim::trajectory(scene, 10, {}, 41)) {
      CHECK(label_qc(sim::geometric_fov(scene, st.pose)).monotone_ok);
    }
  }
}

TEST_CASE("label pipeline tracks the geometric free space") {
  const auto scene = sim::build_scene(sim::SceneClass::kCorridor, 3);
  sim::TrajectoryParams tp;
  tp.frame_dt = 0.25;
  const auto traj = sim::trajectory(scene, 16, tp, 3);
  sim::LidarParams lp;
  lp.num_beams = 2048;
  lp.relief_depth = 0.225;
  lp.relief_protrusion = 0.075;
  std::vector<LidarFrame> frames;
  std::vector<PoseSE3> poses;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    frames.push_back(sim::lidar_scan(scene, traj[k].pose, lp, 500 + k));
    poses.push_back(traj[k].pose);
  }
  const auto labels = generate_labels(frames, poses, LabelParams{}, 4);
  REQUIRE(labels.size() == poses.size());
  double total = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    CHECK(columns_monotone(labels[k]));
    total += iou(labels[k], sim::geometric_fov(scene, poses[k]));
  }
  CHECK(total / double(labels.size()) >= 0.85);

  // Same inputs on one thread give the same labels.
  CHECK(generate_labels(frames, poses, LabelParams{}, 1) == labels);
}

TEST_CASE("write_labels emits PGMs and a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "radarseg_labels_test";
  std::filesystem::remove_all(dir);
  FovLabel l;
  for (std::size_t c = 0; c < 128; ++c) {
    for (std::size_t r = 0; r < c; ++r) l.set(r, c, true);
  }
  const std::size_t ids[] = {7};
  const FovLabel labels[] = {l};
  write_labels(dir, ids, labels);
  CHECK(read_grid_pgm<FovTag>(dir / "label_00007.pgm") == l);
  std::ifstream in(dir / "labels_manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["frames"][0]["id"] == 7);
  CHECK(j["frames"][0]["monotone_ok"] == true);
  std::filesystem::remove_all(dir);
}

#include <doctest.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "radarseg/simworld.hpp"

using namespace radarseg;
using namespace radarseg::sim;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Peak {
  std::size_t a, d, r;
};

Peak argmax3(const ComplexTensor& t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(t[i]) > std::abs(t[best])) best = i;
  }
  const std::size_t R = t.extent(2), D = t.extent(1);
  return {best / (D * R), (best / R) % D, best % R};
}

// Distance from a point to a segment in the plane.
double segment_distance(double px, double py, double x0, double y0, double x1, double y1) {
  const double vx = x1 - x0, vy = y1 - y0;
  const double s = std::clamp(((px - x0) * vx + (py - y0) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
  return std::hypot(px - x0 - s * vx, py - y0 - s * vy);
}

Scene empty_room(double x0, double y0, double x1, double y1, double height = 3.0) {
  Scene s;
  s.room = Box{x0, y0, x1, y1, 0.0, height};
  return s;
}

// Single scatterer placed at (range, azimuth) from a sensor at the origin
// facing +x, at the radar mount height.
Scene one_scatterer(double range, double az_deg, double refl = 1.0) {
  Scene s;
  s.bounded = false;
  s.scatterers.push_back({range * std::cos(az_deg * kDeg), range * std::sin(az_deg * kDeg), 1.0, refl});
  return s;
}

}  // namespace

TEST_CASE("build_scene is deterministic per class and seed") {
  const Scene a = build_scene(SceneClass::kOpen, 7);
  const Scene b = build_scene(SceneClass::kOpen, 7);
  REQUIRE(a.scatterers.size() == b.scatterers.size());
  for (std::size_t i = 0; i < a.scatterers.size(); ++i) {
    CHECK(a.scatterers[i].x == b.scatterers[i].x);
    CHECK(a.scatterers[i].y == b.scatterers[i].y);
    CHECK(a.scatterers[i].z == b.scatterers[i].z);
    CHECK(a.scatterers[i].reflectivity == b.scatterers[i].reflectivity);
  }
  const Scene c = build_scene(SceneClass::kOpen, 8);
  CHECK(c.room.x_max != a.room.x_max);
}

TEST_CASE("scene classes follow their layout contracts") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(build_scene(SceneClass::kLab, seed).obstacles.size() >= 5);
    CHECK(build_scene(SceneClass::kOpen, seed).obstacles.size() <= 2);
    for (SceneClass cls : {SceneClass::kCorridor, SceneClass::kTunnel}) {
      const Scene s = build_scene(cls, seed);
      const double lx = s.room.x_max - s.room.x_min, ly = s.room.y_max - s.room.y_min;
      CHECK(std::max(lx, ly) / std::min(lx, ly) >= 4.0);
    }
  }
  CHECK(to_string(scene_class_from_string("tunnel")) == "tunnel");
  CHECK_THROWS_AS(scene_class_from_string("cave"), std::invalid_argument);
}

TEST_CASE("scatterers lie on wall or obstacle faces inside the room") {
  for (SceneClass cls : kAllSceneClasses) {
    const Scene s = build_scene(cls, 3);
    REQUIRE(!s.scatterers.empty());
    for (const auto& p : s.scatterers) {
      CHECK(p.reflectivity > 0);
      CHECK(p.x >= s.room.x_min - 1e-9);
      CHECK(p.x <= s.room.x_max + 1e-9);
      CHECK(p.y >= s.room.y_min - 1e-9);
      CHECK(p.y <= s.room.y_max + 1e-9);
      CHECK(p.z >= s.room.z_min);
      CHECK(p.z <= s.room.z_max);
      double d = 1e9;
      for (const auto& w : s.walls()) d = std::min(d, segment_distance(p.x, p.y, w.x0, w.y0, w.x1, w.y1));
      for (const auto& b : s.obstacles) {
        d = std::min(d, segment_distance(p.x, p.y, b.x_min, b.y_min, b.x_max, b.y_min));
        d = std::min(d, segment_distance(p.x, p.y, b.x_max, b.y_min, b.x_max, b.y_max));
        d = std::min(d, segment_distance(p.x, p.y, b.x_min, b.y_max, b.x_max, b.y_max));
        d = std::min(d, segment_distance(p.x, p.y, b.x_min, b.y_min, b.x_min, b.y_max));
      }
      CHECK(d < 1e-9);
    }
  }
}

TEST_CASE("degenerate room sizes are rejected") {
  CHECK_THROWS_AS(build_scene(SceneClass::kCorridor, 1, {.length = 20.0, .width = 1.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_scene(SceneClass::kOpen, 1, {.length = 1.0, .width = 10.0}),
                  std::invalid_argument);
  CHECK_NOTHROW(build_scene(SceneClass::kCorridor, 1, {.length = 20.0, .width = 2.0}));
}

TEST_CASE("trajectory stays in free space with bounded steps") {
  const TrajectoryParams tp;
  for (SceneClass cls : kAllSceneClasses) {
    const Scene s = build_scene(cls, 11);
    const auto one = trajectory(s, 1, tp, 5);
    REQUIRE(one.size() == 1);
    CHECK(s.point_free(one[0].pose.translation.x(), one[0].pose.translation.y(), 0.0));

    const auto path = trajectory(s, 60, tp, 5);
    REQUIRE(path.size() == 60);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const auto& st = path[k];
      CHECK_NOTHROW(st.pose.validate());
      for (const auto& b : s.obstacles) {
        CHECK_FALSE(b.contains_xy(st.pose.translation.x(), st.pose.translation.y()));
      }
      CHECK(st.velocity.norm() <= dsp::default_radar_config().max_doppler);
      if (st.velocity.norm() > 0) {
        CHECK(std::abs(std::remainder(std::atan2(st.velocity.y(), st.velocity.x()) - st.pose.yaw(),
                                      2 * std::numbers::pi)) < 1e-9);
      }
      if (k > 0) {
        const double step = (st.pose.translation - path[k - 1].pose.translation).norm();
        CHECK(step <= tp.speed * tp.frame_dt + 1e-12);
      }
    }
  }
}

TEST_CASE("trajectory fails explicitly without free space") {
  Scene s = empty_room(0, 0, 3, 3);
  s.obstacles.push_back({0, 0, 3, 3, 0, 2});
  CHECK_THROWS_AS(trajectory(s, 5, {}, 1), std::runtime_error);
}

TEST_CASE("lidar: empty unbounded scene returns nothing") {
  Scene s;
  s.bounded = false;
  CHECK(lidar_scan(s, PoseSE3{}, {}, 1).points.empty());
}

TEST_CASE("lidar: forward beam hits a flat wall 2 m away exactly") {
  const Scene s = empty_room(-10.0, -10.0, 3.0, 10.0);
  LidarParams lp;
  lp.num_rings = 1;
  lp.noise_sigma = 0.0;
  const auto frame = lidar_scan(s, PoseSE3::from_yaw(1.0, 0.0, 0.0), lp, 1);
  REQUIRE(frame.points.size() == lp.num_beams);
  const auto& p = frame.points[0];
  CHECK(std::hypot(p.x, p.y, p.z - lp.mount_height) == 2.0);
  CHECK(p.y == 0.0);
}

TEST_CASE("lidar: range noise stays within 5 sigma of the analytic intersection") {
  // Box room without obstacles: the first hit is the nearest of six planes.
  const Scene s = empty_room(-4.0, -3.0, 5.0, 2.5, 2.8);
  const double yaw = 0.3;
  const Eigen::Vector3d t(0.5, -0.2, 0.0);
  LidarParams lp;
  lp.noise_sigma = 0.01;
  const auto frame = lidar_scan(s, PoseSE3::from_yaw(t.x(), t.y(), yaw), lp, 42);
  REQUIRE(frame.points.size() == lp.num_rings * lp.num_beams);
  const Eigen::Vector3d o(t.x(), t.y(), lp.mount_height);
  double worst = 0.0;
  for (const auto& p : frame.points) {
    CHECK(p.intensity >= 0);
    const Eigen::Vector3d body(p.x, p.y, p.z - lp.mount_height);
    const double measured = body.norm();
    const Eigen::Vector3d d = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * body.normalized();
    const double planes[3][2] = {{-4.0, 5.0}, {-3.0, 2.5}, {0.0, 2.8}};
    double analytic = 1e9;
    for (int a = 0; a < 3; ++a) {
      for (double plane : planes[a]) {
        if (d[a] == 0) continue;
        const double u = (plane - o[a]) / d[a];
        if (u > 0) analytic = std::min(analytic, u);
      }
    }
    worst = std::max(worst, std::abs(measured - analytic));
  }
  CHECK(worst <= 5 * lp.noise_sigma);
  CHECK(worst > 0.0);
}

TEST_CASE("radar_echo: nothing visible and noise disabled gives a zero cube") {
  Scene s;
  s.bounded = false;
  const auto cfg = dsp::default_radar_config();
  const auto cube = radar_echo(s, PoseSE3{}, Eigen::Vector3d::Zero(), cfg, {.snr_db = std::nullopt}, 3);
  for (const auto& z : cube.data.values()) CHECK(z == Complex(0, 0));
}

TEST_CASE("radar_echo: single scatterer lands on the bins the DSP chain predicts") {
  const auto cfg = dsp::default_radar_config();
  const Scene s = one_scatterer(4.0, -20.0);
  const auto cube = radar_echo(s, PoseSE3{}, Eigen::Vector3d::Zero(), cfg, {.snr_db = 30.0}, 9);
  const auto rd = dsp::adc_to_rd(cube);
  const auto ra = dsp::rd_to_ra(rd);
  const auto p = argmax3(ra.data);
  CHECK(p.r == 32);
  CHECK(p.d == 64);
  CHECK(p.a == static_cast<std::size_t>(std::lround(cfg.angle_bin(-20.0, 12))));
  const auto q = argmax3(rd.data);
  CHECK(q.r == 32);
  CHECK(q.d == 64);
}

TEST_CASE("radar_echo: moving sensor shifts Doppler by the closing speed") {
  const auto cfg = dsp::default_radar_config();
  const Scene s = one_scatterer(6.0, 0.0);
  // Driving toward the scatterer at 1 m/s: range rate about -1 m/s.
  const auto vis = visible_scatterers(s, PoseSE3{}, Eigen::Vector3d(1.0, 0, 0), cfg, {});
  REQUIRE(vis.size() == 1);
  CHECK(vis[0].radial_velocity == doctest::Approx(-1.0));
  const auto cube = radar_echo(s, PoseSE3{}, Eigen::Vector3d(1.0, 0, 0), cfg, {.snr_db = std::nullopt}, 9);
  CHECK(argmax3(dsp::adc_to_rd(cube).data).d == 64 - 25);
}

TEST_CASE("radar_echo: doubling range quarters the peak magnitude") {
  const auto cfg = dsp::default_radar_config();
  const EchoParams ep{.snr_db = std::nullopt};
  auto peak = [&](double r) {
    const auto rd = dsp::adc_to_rd(radar_echo(one_scatterer(r, 0.0), PoseSE3{}, Eigen::Vector3d::Zero(), cfg, ep, 5));
    double m = 0;
    for (const auto& z : rd.data.values()) m = std::max(m, std::abs(z));
    return m;
  };
  CHECK(peak(2.0) / peak(4.0) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("radar_echo is linear in each scatterer's reflectivity") {
  const auto cfg = dsp::default_radar_config();
  const EchoParams ep{.snr_db = std::nullopt};
  auto echo = [&](double refl) {
    Scene s = one_scatterer(3.0, 10.0, 0.7);
    s.scatterers.push_back({5.0, -1.0, 1.2, refl});
    return radar_echo(s, PoseSE3{}, Eigen::Vector3d(0.3, 0.1, 0), cfg, ep, 21).data;
  };
  const auto f0 = echo(0.0), f1 = echo(1.0), f2 = echo(2.0);
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < f0.size(); ++i) {
    err = std::max(err, std::abs((f2[i] - f1[i]) - (f1[i] - f0[i])));
    scale = std::max(scale, std::abs(f1[i]));
  }
  CHECK(err <= 1e-12 * scale);
}

TEST_CASE("radar_echo excludes occluded scatterers and is seeded") {
  const auto cfg = dsp::default_radar_config();
  Scene s = one_scatterer(6.0, 0.0);
  s.obstacles.push_back({3.0, -0.5, 3.5, 0.5, 0.0, 2.0});
  CHECK(visible_scatterers(s, PoseSE3{}, Eigen::Vector3d::Zero(), cfg, {}).empty());
  // Behind the sensor is invisible too.
  Scene back = one_scatterer(6.0, 180.0);
  CHECK(visible_scatterers(back, PoseSE3{}, Eigen::Vector3d::Zero(), cfg, {}).empty());

  const Scene room = build_scene(SceneClass::kLab, 2);
  const auto st = trajectory(room, 1, {}, 2)[0];
  const auto a = radar_echo(room, st.pose, st.velocity, cfg, {}, 77);
  const auto b = radar_echo(room, st.pose, st.velocity, cfg, {}, 77);
  const auto c = radar_echo(room, st.pose, st.velocity, cfg, {}, 78);
  CHECK(a.data == b.data);
  CHECK_FALSE(a.data == c.data);
}

TEST_CASE("closed loop: random single scatterers are recovered within one bin") {
  const auto cfg = dsp::default_radar_config();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ur(1.0, 11.0), ua(-40.0, 40.0), uv(-2.0, 2.0);
  int hits = 0;
  const int K = 100;
  for (int k = 0; k < K; ++k) {
    const double r = ur(rng), az = ua(rng), v = uv(rng);
    const auto cube = synthesize_echo({{r, az, v, 1.0}}, cfg, 20.0, 1000 + k);
    const auto p = argmax3(dsp::rd_to_ra(dsp::adc_to_rd(cube)).data);
    const bool range_ok = std::abs(double(p.r) - r / cfg.range_res) <= 1.0;
    const bool angle_ok = std::abs(double(p.a) - cfg.angle_bin(az, 12)) <= 1.0;
    hits += range_ok && angle_ok;
  }
  CHECK(hits >= 95);
}

TEST_CASE("geometric_fov: open hall is all free") {
  const Scene hall = empty_room(0.0, -12.0, 24.0, 12.0);
  const auto label = geometric_fov(hall, PoseSE3::from_yaw(2.0, 0.0, 0.0));
  CHECK(label.count() == label.size());
}

TEST_CASE("geometric_fov: perpendicular wall at 6 m") {
  const Scene s = empty_room(-20.0, -20.0, 6.0, 20.0);
  const auto label = geometric_fov(s, PoseSE3{});
  for (std::size_t col : {63u, 64u}) {
    for (std::size_t r = 0; r < 128; ++r) {
      const double start = r * 12.0 / 128.0;
      CHECK(label(r, col) == (start < 6.0 ? 1 : 0));
    }
  }
}

TEST_CASE("geometric_fov columns are monotone") {
  for (SceneClass cls : kAllSceneClasses) {
    const Scene s = build_scene(cls, 31);
    for (const auto& st : trajectory(s, 20, {}, 31)) {
      CHECK(columns_monotone(geometric_fov(s, st.pose)));
    }
  }
}

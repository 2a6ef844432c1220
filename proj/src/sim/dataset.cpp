/*
 * Copyright 2026 The radarseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "radarseg/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"
#include "radarseg/parallel.hpp"
#include "radarseg/random.hpp"

namespace radarseg::sim {

namespace {

// Seed-stream tags; every random draw in a run derives from the root seed.
enum : std::uint64_t { kSceneStream = 1, kTrajectoryStream, kLidarStream, kEchoStream };

nlohmann::json radar_to_json(const dsp::RadarConfig& c) {
  return {{"num_channels", c.num_channels},     {"num_chirps", c.num_chirps},
          {"num_samples", c.num_samples},       {"max_range", c.max_range},
          {"max_doppler", c.max_doppler},       {"range_res", c.range_res},
          {"doppler_res", c.doppler_res},       {"carrier_freq", c.carrier_freq},
          {"virtual_spacing", c.virtual_spacing}, {"sample_interval", c.sample_interval},
          {"chirp_slope", c.chirp_slope},       {"chirp_interval", c.chirp_interval}};
}

dsp::RadarConfig radar_from_json(const nlohmann::json& j) {
  dsp::RadarConfig c;
  c.num_channels = j.at("num_channels");
  c.num_chirps = j.at("num_chirps");
  c.num_samples = j.at("num_samples");
  c.max_range = j.at("max_range");
  c.max_doppler = j.at("max_doppler");
  c.range_res = j.at("range_res");
  c.doppler_res = j.at("doppler_res");
  c.carrier_freq = j.at("carrier_freq");
  c.virtual_spacing = j.at("virtual_spacing");
  c.sample_interval = j.at("sample_interval");
  c.chirp_slope = j.at("chirp_slope");
  c.chirp_interval = j.at("chirp_interval");
  c.validate();
  return c;
}

}  // namespace

void SimulationParams::validate() const {
  try {
    dsp::RadarConfig r = radar;
    r.finalize();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("radar: ") + e.what());
  }
  if (!(trajectory.speed >= 0) || trajectory.speed > radar.max_doppler) {
    throw ConfigError("trajectory speed must lie in [0, radar max_doppler]");
  }
  if (!(trajectory.frame_dt > 0)) throw ConfigError("frame_dt must be > 0");
  if (sequence_length == 0) throw ConfigError("sequence_length must be >= 1");
  if (!(scene.scatterer_density > 0)) throw ConfigError("scatterer_density must be > 0");
  if ((scene.length != 0 && scene.length < 2.0) || (scene.width != 0 && scene.width < 2.0)) {
    throw ConfigError("scene extents must be 0 (random) or at least 2 m");
  }
}

void save_lidar(const std::filesystem::path& path, const LidarFrame& frame) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "x,y,z,intensity\n";
    char line[128];
    for (const auto& p : frame.points) {
      const int n = std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.4f\n", p.x, p.y, p.z, p.intensity);
      out.write(line, n);
    }
  });
}

LidarFrame load_lidar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "x,y,z,intensity") {
    throw DataError(path.string() + ": expected header x,y,z,intensity");
  }
  LidarFrame f;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    LidarPoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &p.x, &p.y, &p.z, &p.intensity) != 4) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    f.points.push_back(p);
  }
  return f;
}

void save_pose(const std::filesystem::path& path, const TrajectoryState& s) {
  nlohmann::json j;
  std::vector<double> r;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(s.pose.rotation(i, k));
  }
  j["R"] = r;
  j["t"] = {s.pose.translation.x(), s.pose.translation.y(), s.pose.translation.z()};
  j["velocity"] = {s.velocity.x(), s.velocity.y(), s.velocity.z()};
  write_text_atomic(path, j.dump() + "\n");
}

TrajectoryState load_pose(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    TrajectoryState s;
    const auto r = j.at("R").get<std::vector<double>>();
    const auto t = j.at("t").get<std::vector<double>>();
    const auto v = j.at("velocity").get<std::vector<double>>();
    if (r.size() != 9 || t.size() != 3 || v.size() != 3) throw DataError("bad pose array sizes");
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) s.pose.rotation(i, k) = r[3 * i + k];
      s.pose.translation[i] = t[i];
      s.velocity[i] = v[i];
    }
    s.pose.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

DatasetManifest simulate_dataset(const SimulationParams& params, const std::filesystem::path& dir,
                                 std::size_t total_frames, std::uint64_t seed, std::size_t jobs,
                                 const nlohmann::json& config_echo) {
  params.validate();
  if (total_frames == 0 || total_frames % 4 != 0) {
    throw ConfigError("frame count must be a positive multiple of 4 (equal frames per scene class)");
  }
  SimulationParams p = params;
  p.radar.finalize();
  std::filesystem::create_directories(dir);

  DatasetManifest m;
  m.seed = seed;
  m.radar = p.radar;
  m.config = config_echo;
  const std::size_t per_class = total_frames / 4;

  // Plan every frame first so work items are independent.
  struct Job {
    std::size_t sequence;
    std::size_t index;
  };
  std::vector<Job> plan;
  std::size_t next_id = 0;
  for (SceneClass cls : kAllSceneClasses) {
    for (std::size_t done = 0; done < per_class;) {
      SequenceEntry s;
      s.sequence = m.sequences.size();
      s.scene_class = cls;
      s.scene_seed = mix_seed(mix_seed(seed, kSceneStream), s.sequence);
      const std::size_t n = std::min(p.sequence_length, per_class - done);
      for (std::size_t k = 0; k < n; ++k) {
        FrameEntry f;
        f.id = next_id++;
        f.scene_class = cls;
        f.sequence = s.sequence;
        f.adc = frame_file("adc_", f.id, ".rten");
        f.lidar = frame_file("lidar_", f.id, ".csv");
        f.pose = frame_file("pose_", f.id, ".json");
        f.gtlabel = frame_file("gtlabel_", f.id, ".pgm");
        s.frame_ids.push_back(f.id);
        m.frames.push_back(f);
        plan.push_back({s.sequence, k});
      }
      done += n;
      m.sequences.push_back(std::move(s));
    }
  }

  std::vector<Scene> scenes;
  std::vector<std::vector<TrajectoryState>> paths;
  for (const auto& s : m.sequences) {
    scenes.push_back(build_scene(s.scene_class, s.scene_seed, p.scene));
    paths.push_back(trajectory(scenes.back(), s.frame_ids.size(), p.trajectory,
                               mix_seed(mix_seed(seed, kTrajectoryStream), s.sequence)));
  }

  parallel_for(m.frames.size(), jobs, [&](std::size_t i) {
    const FrameEntry& f = m.frames[i];
    const Scene& scene = scenes[plan[i].sequence];
    const TrajectoryState& st = paths[plan[i].sequence][plan[i].index];
    const auto lidar = lidar_scan(scene, st.pose, p.lidar, mix_seed(mix_seed(seed, kLidarStream), f.id));
    const auto cube = radar_echo(scene, st.pose, st.velocity, p.radar, p.echo,
                                 mix_seed(mix_seed(seed, kEchoStream), f.id));
    write_rten(dir / f.adc, cube.data);
    save_lidar(dir / f.lidar, lidar);
    save_pose(dir / f.pose, st);
    write_grid_pgm(dir / f.gtlabel, geometric_fov(scene, st.pose));
  });

  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : m.frames) {
    frames.push_back({{"id", f.id},
                      {"scene_class", to_string(f.scene_class)},
                      {"sequence", f.sequence},
                      {"adc", f.adc},
                      {"lidar", f.lidar},
                      {"pose", f.pose},
                      {"gtlabel", f.gtlabel}});
  }
  nlohmann::json sequences = nlohmann::json::array();
  for (const auto& s : m.sequences) {
    sequences.push_back({{"sequence", s.sequence},
                         {"scene_class", to_string(s.scene_class)},
                         {"scene_seed", s.scene_seed},
                         {"frame_ids", s.frame_ids}});
  }
  const nlohmann::json manifest = {{"format", "radarseg-dataset"},
                                   {"version", 1},
                                   {"seed", seed},
                                   {"radar", radar_to_json(p.radar)},
                                   {"sequences", sequences},
                                   {"frames", frames},
                                   {"config", config_echo}};
  write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  if (!std::filesystem::exists(path)) throw DataError("no manifest.json in " + dir.string());
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    if (j.at("format") != "radarseg-dataset") throw DataError(path.string() + ": not a dataset manifest");
    DatasetManifest m;
    m.seed = j.at("seed");
    m.radar = radar_from_json(j.at("radar"));
    m.config = j.value("config", nlohmann::json::object());
    for (const auto& f : j.at("frames")) {
      FrameEntry e;
      e.id = f.at("id");
      e.scene_class = scene_class_from_string(f.at("scene_class"));
      e.sequence = f.at("sequence");
      e.adc = f.at("adc");
      e.lidar = f.at("lidar");
      e.pose = f.at("pose");
      e.gtlabel = f.at("gtlabel");
      if (!m.frames.empty() && e.id <= m.frames.back().id) {
        throw DataError(path.string() + ": frame ids must be strictly increasing");
      }
      m.frames.push_back(e);
    }
    for (const auto& s : j.at("sequences")) {
      SequenceEntry e;
      e.sequence = s.at("sequence");
      e.scene_class = scene_class_from_string(s.at("scene_class"));
      e.scene_seed = s.at("scene_seed");
      e.frame_ids = s.at("frame_ids").get<std::vector<std::size_t>>();
      m.sequences.push_back(e);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

dsp::AdcCube load_adc(const std::filesystem::path& dir, const DatasetManifest& m,
                      const FrameEntry& f) {
  dsp::AdcCube cube{m.radar, read_complex_rten(dir / f.adc)};
  try {
    cube.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(f.adc + ": " + e.what());
  }
  return cube;
}

}  // namespace radarseg::sim

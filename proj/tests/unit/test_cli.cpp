#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "radarseg/app/config.hpp"
#include "radarseg/dataset.hpp"
#include "radarseg/errors.hpp"
#include "radarseg/radar_dsp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace radarseg;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "radarseg_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(RADARSEG_CLI) + " " + args + " > " +
                          (kRoot / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = kRoot / name;
  std::ofstream(p) << j.dump();
  return p;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string s; std::getline(in, s);) n += !s.empty();
  return n;
}

// One small dataset shared by the cases below.
struct Fixture {
  Fixture() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    tiny = write_config("tiny.json", {{"model", {{"base_channels", 4}}},
                                      {"train", {{"epochs", 1}, {"batch_size", 4}}},
                                      {"eval", {{"thresholds", {0.5}}}}});
    REQUIRE(run("simulate --config " + tiny.string() + " --frames 8 --seed 3 --out " +
                (kRoot / "ds").string()) == 0);
  }
  fs::path tiny;
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("config: defaults validate and round-trip") {
  const app::RunConfig c = app::RunConfig::from_json(json::object());
  CHECK_NOTHROW(c.validate());
  const app::RunConfig back = app::RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(c.frames == 200);
  CHECK(c.model.base_channels == 16);
}

TEST_CASE("config: strict parsing") {
  CHECK_THROWS_AS(app::RunConfig::from_json({{"bogus", json::object()}}), ConfigError);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"train", {{"epoch", 3}}}}), ConfigError);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"train", {{"epochs", "3"}}}}), ConfigError);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"scene", {{"frames", 6}}}}), ConfigError);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"model", {{"attention", "both"}}}}), ConfigError);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"eval", {{"thresholds", {1.5}}}}}), ConfigError);
}

TEST_CASE("cli: simulate splits classes and is reproducible") {
  auto& f = fixture();
  REQUIRE(run("simulate --config " + f.tiny.string() + " --frames 40 --seed 11 --out " +
              (kRoot / "a").string()) == 0);
  REQUIRE(run("simulate --config " + f.tiny.string() + " --frames 40 --seed 11 --out " +
              (kRoot / "b").string()) == 0);
  const auto ma = sim::read_manifest(kRoot / "a");
  REQUIRE(ma.frames.size() == 40);
  for (auto cls : sim::kAllSceneClasses) {
    std::size_t n = 0;
    for (const auto& fr : ma.frames) n += fr.scene_class == cls;
    CHECK(n == 10);
  }
  CHECK(slurp(kRoot / "a" / "manifest.json") == slurp(kRoot / "b" / "manifest.json"));
  CHECK(slurp(kRoot / "a" / "adc_00017.rten") == slurp(kRoot / "b" / "adc_00017.rten"));
  CHECK(fs::exists(kRoot / "a" / "run_config.json"));
  fs::remove_all(kRoot / "a");
  fs::remove_all(kRoot / "b");
}

TEST_CASE("cli: argument and config errors exit with 2") {
  auto& f = fixture();
  CHECK(run("simulate --frames 0 --out " + (kRoot / "z").string()) == 2);
  CHECK(run("simulate --frames 6 --out " + (kRoot / "z").string()) == 2);
  CHECK(run("frobnicate") == 2);
  const auto bad = write_config("bad.json", {{"train", {{"epochz", 1}}}});
  CHECK(run("simulate --config " + bad.string() + " --frames 8 --out " + (kRoot / "z").string()) ==
        2);
  // Non-empty output directory without --force.
  CHECK(run("simulate --config " + f.tiny.string() + " --frames 8 --out " +
            (kRoot / "ds").string()) == 2);
}

TEST_CASE("cli: dsp writes model inputs consistent with the transforms") {
  auto& f = fixture();
  const fs::path ds = kRoot / "ds";
  REQUIRE(run("dsp --dataset " + ds.string() + " --mode rd --out " + (kRoot / "rd").string()) == 0);
  REQUIRE(run("dsp --dataset " + ds.string() + " --mode ra --out " + (kRoot / "ra").string()) == 0);
  const RealTensor rd = read_real_rten(kRoot / "rd" / "rd_00003.rten");
  const RealTensor ra = read_real_rten(kRoot / "ra" / "ra_00003.rten");
  CHECK(rd.dims() == Shape{24, 128, 128});
  CHECK(ra.dims() == Shape{24, 128, 128});

  const std::size_t plane = 12 * 128 * 128;
  ComplexTensor rdc({12, 128, 128});
  for (std::size_t i = 0; i < plane; ++i) rdc[i] = Complex(rd[i], rd[plane + i]);
  const ComplexTensor want = dsp::rd_to_ra(dsp::RdTensor{rdc}).data;
  double err = 0, ref = 0;
  for (std::size_t i = 0; i < plane; ++i) {
    err = std::max(err, std::abs(want[i] - Complex(ra[i], ra[plane + i])));
    ref = std::max(ref, std::abs(want[i]));
  }
  CHECK(err <= 1e-9 * ref);
  (void)f;
}

TEST_CASE("cli: labels, train, eval and a missing checkpoint") {
  auto& f = fixture();
  const fs::path ds = kRoot / "ds";
  REQUIRE(run("labels --config " + f.tiny.string() + " --dataset " + ds.string() + " --out " +
              (kRoot / "labels").string()) == 0);
  CHECK(fs::exists(kRoot / "labels" / "label_00000.pgm"));
  CHECK(fs::exists(kRoot / "labels" / "qc.csv"));

  REQUIRE(run("train --config " + f.tiny.string() + " --dataset " + ds.string() + " --labels " +
              (kRoot / "labels").string() + " --out " + (kRoot / "train").string()) == 0);
  CHECK(line_count(kRoot / "train" / "history.csv") == 2);
  CHECK(fs::exists(kRoot / "train" / "checkpoint.rckp"));
  const json rc = json::parse(slurp(kRoot / "train" / "run_config.json"));
  CHECK(rc.at("seed").is_number());
  CHECK(rc.at("config").at("model").at("base_channels") == 4);

  REQUIRE(run("eval --config " + f.tiny.string() + " --dataset " + ds.string() + " --labels " +
              (kRoot / "labels").string() + " --checkpoint " +
              (kRoot / "train" / "checkpoint.rckp").string() + " --split all --out " +
              (kRoot / "eval").string()) == 0);
  CHECK(line_count(kRoot / "eval" / "sweep.csv") == 2);
  CHECK(line_count(kRoot / "eval" / "range_bins.csv") == 9);
  CHECK(line_count(kRoot / "eval" / "comparison.csv") == 4);

  CHECK(run("eval --dataset " + ds.string() + " --checkpoint " + (kRoot / "nope.rckp").string() +
            " --out " + (kRoot / "eval2").string()) == 3);
}

TEST_CASE("config: integers built in code and negative counts") {
  const app::RunConfig c = app::RunConfig::from_json({{"scene", {{"frames", 40}}}});
  CHECK(c.frames == 40);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"scene", {{"frames", -4}}}}), ConfigError);
  CHECK_THROWS_AS(app::RunConfig::from_json({{"scene", {{"frames", 4.5}}}}), ConfigError);
}

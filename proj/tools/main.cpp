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

#include <CLI11.hpp>
#include <iostream>

#include "radarseg/app/commands.hpp"
#include "radarseg/errors.hpp"

namespace fs = std::filesystem;
using namespace radarseg;

namespace {

struct Common {
  std::string config, out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool force = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--config", c.config, "RunConfig JSON file")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--seed", c.seed, "root random seed");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", c.force, "overwrite a non-empty output directory");
}

app::Options make_options(const Common& c) {
  app::Options o;
  o.config = c.config.empty() ? app::RunConfig::from_json(nlohmann::json::object())
                              : app::RunConfig::load(c.config);
  o.out = c.out;
  o.seed = c.seed;
  o.jobs = c.jobs;
  o.force = c.force;
  o.log = &std::cerr;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"radarseg: radar free-space segmentation pipeline"};
  cli.require_subcommand(1);
  Common common;
  std::string dataset, labels, checkpoint, mode = "rd", split = "val";
  std::optional<std::size_t> frames;

  auto* simulate = cli.add_subcommand("simulate", "synthesize a radar + LiDAR dataset");
  add_common(simulate, common);
  simulate->add_option("--frames", frames, "total frames, split equally over scene classes");

  auto* dsp = cli.add_subcommand("dsp", "write model-ready tensors (adc, ra or rd) per frame");
  add_common(dsp, common);
  dsp->add_option("--dataset", dataset)->required();
  dsp->add_option("--mode", mode)->check(CLI::IsMember({"adc", "ra", "rd"}));

  auto* lab = cli.add_subcommand("labels", "generate LiDAR free-space labels with QC");
  add_common(lab, common);
  lab->add_option("--dataset", dataset)->required();

  auto* train = cli.add_subcommand("train", "train the segmentation network");
  add_common(train, common);
  train->add_option("--dataset", dataset)->required();
  train->add_option("--labels", labels, "label directory from 'labels' (default: generate)");

  auto* ev = cli.add_subcommand("eval", "metrics, sweeps, binned tables and panels");
  add_common(ev, common);
  ev->add_option("--dataset", dataset)->required();
  ev->add_option("--checkpoint", checkpoint)->required();
  ev->add_option("--labels", labels);
  ev->add_option("--split", split)->check(CLI::IsMember({"train", "val", "all"}));

  auto* ablate = cli.add_subcommand("ablate", "spatial vs channel attention paired runs");
  add_common(ablate, common);
  ablate->add_option("--dataset", dataset)->required();
  ablate->add_option("--labels", labels);

  auto* inputs = cli.add_subcommand("compare-inputs", "adc vs ra vs rd input runs");
  add_common(inputs, common);
  inputs->add_option("--dataset", dataset)->required();
  inputs->add_option("--labels", labels);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    app::Options opt = make_options(common);
    const std::optional<fs::path> labels_dir =
        labels.empty() ? std::nullopt : std::optional<fs::path>(labels);
    if (*simulate) {
      if (frames) opt.config.frames = *frames;
      opt.config.validate();
      app::cmd_simulate(opt);
    } else if (*dsp) {
      app::cmd_dsp(opt, dataset, nn::input_mode_from_string(mode));
    } else if (*lab) {
      app::cmd_labels(opt, dataset);
    } else if (*train) {
      app::cmd_train(opt, dataset, labels_dir);
    } else if (*ev) {
      app::cmd_eval(opt, dataset, checkpoint, labels_dir, app::split_from_string(split));
    } else if (*ablate) {
      app::cmd_ablate(opt, dataset, labels_dir);
    } else if (*inputs) {
      app::cmd_compare_inputs(opt, dataset, labels_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::exit_code_for(e);
  }
  return 0;
}

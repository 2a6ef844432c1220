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

#ifndef RADARSEG_APP_COMMANDS_HPP_
#define RADARSEG_APP_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "radarseg/app/config.hpp"

namespace radarseg::app {

struct Options {
  RunConfig config;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool force = false;
  std::ostream* log = nullptr;  // progress lines; null for silence
};

// Creates `out`. An existing non-empty directory is refused (ConfigError)
// unless force is set, in which case files are overwritten in place.
void prepare_out_dir(const std::filesystem::path& out, bool force);

// run_config.json: command, seed, the effective config and the document as given.
void write_run_config(const Options& opt, const std::string& command);

void cmd_simulate(const Options& opt);
void cmd_dsp(const Options& opt, const std::filesystem::path& dataset, nn::InputMode mode);
void cmd_labels(const Options& opt, const std::filesystem::path& dataset);
void cmd_train(const Options& opt, const std::filesystem::path& dataset,
               const std::optional<std::filesystem::path>& labels_dir);

enum class Split { kTrain, kVal, kAll };
Split split_from_string(const std::string& s);

void cmd_eval(const Options& opt, const std::filesystem::path& dataset,
              const std::filesystem::path& checkpoint,
              const std::optional<std::filesystem::path>& labels_dir, Split split);
void cmd_ablate(const Options& opt, const std::filesystem::path& dataset,
                const std::optional<std::filesystem::path>& labels_dir);
void cmd_compare_inputs(const Options& opt, const std::filesystem::path& dataset,
                        const std::optional<std::filesystem::path>& labels_dir);

// Exit codes: 0 success, 2 configuration, 3 data, 4 numerical failure, 1 other.
int exit_code_for(const std::exception& e);

}  // namespace radarseg::app

#endif  // RADARSEG_APP_COMMANDS_HPP_

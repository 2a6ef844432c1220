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

#ifndef RADARSEG_IO_HPP_
#define RADARSEG_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

namespace radarseg {

// Writes through a sibling temp file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text_file(const std::filesystem::path& path);

// printf-style "%05d" frame file names, e.g. frame_file("adc_", 3, ".rten").
std::string frame_file(const std::string& prefix, std::size_t id,
                       const std::string& suffix);

}  // namespace radarseg

#endif  // RADARSEG_IO_HPP_

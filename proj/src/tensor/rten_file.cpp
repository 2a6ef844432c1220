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

#include <fstream>

#include "radarseg/errors.hpp"
#include "radarseg/io.hpp"
#include "radarseg/tensor.hpp"

namespace radarseg {

void write_rten(const std::filesystem::path& path, const RealTensor& t) {
  write_file_atomic(path, [&](std::ostream& out) { write_rten(out, t); });
}

void write_rten(const std::filesystem::path& path, const ComplexTensor& t) {
  write_file_atomic(path, [&](std::ostream& out) { write_rten(out, t); });
}

AnyTensor read_rten(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file " + path.string());
  try {
    return read_rten(in);
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

RealTensor read_real_rten(const std::filesystem::path& path) {
  auto any = read_rten(path);
  if (auto* t = std::get_if<RealTensor>(&any)) return std::move(*t);
  throw DataError(path.string() + ": expected a real64 tensor");
}

ComplexTensor read_complex_rten(const std::filesystem::path& path) {
  auto any = read_rten(path);
  if (auto* t = std::get_if<ComplexTensor>(&any)) return std::move(*t);
  throw DataError(path.string() + ": expected a complex tensor");
}

}  // namespace radarseg

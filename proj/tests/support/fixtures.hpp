// Copyright 2026 The dpsyn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef DPSYN_TESTS_SUPPORT_FIXTURES_HPP_
#define DPSYN_TESTS_SUPPORT_FIXTURES_HPP_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dpsyn/denoiser.hpp"

namespace dpsyn::testing {

// Small denoiser for gradient and sampler checks.
inline DenoiserConfig tiny_config(Index side = 2, std::vector<Index> hidden = {6},
                                  Index num_classes = 0) {
  DenoiserConfig config;
  config.height = side;
  config.width = side;
  config.hidden = std::move(hidden);
  config.fourier_features = 2;
  config.num_classes = num_classes;
  return config;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dpsyn-unit-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace dpsyn::testing

#endif  // DPSYN_TESTS_SUPPORT_FIXTURES_HPP_

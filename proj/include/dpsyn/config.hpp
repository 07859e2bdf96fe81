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


#ifndef DPSYN_CONFIG_HPP_
#define DPSYN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpsyn/sampler.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

// The JSON Schema (draft-04) every config document is checked against.
std::string_view config_schema();

struct DatasetSpec {
  // Empty when the dataset comes from IDX files.
  std::string builtin;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;

  bool is_builtin() const { return !builtin.empty(); }
};

struct ExperimentConfig {
  // coarse, cleaning, finetune or baseline.
  std::string variant = "coarse";
  // Unset means "auto". tau2 may be +infinity.
  std::optional<std::pair<double, double>> thresholds;
  DatasetSpec dataset;
  Index height = 16;
  Index width = 16;

  bool dp_enabled = true;
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;
  std::size_t lot_size = 1000;
  std::optional<double> noise_multiplier;

  int pretrain_max_epochs = 60;
  double private_epochs = 10.0;
  int multiplicity = 16;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  std::vector<Index> hidden;
  bool conditional = false;
  double learning_rate = 1e-3;
  double pretrain_learning_rate = 3e-4;
  std::size_t batch_size = 128;

  std::string synthetic_kind = "dead-leaves";
  std::size_t synthetic_count = 4000;
  double synthetic_p = 0.13;

  SamplerGrid sampler;

  // The resolved document the fields above were read from.
  nlohmann::json document;

  // Options of one subcommand, e.g. command("account").
  const nlohmann::json& command(const std::string& name) const;
};

// Every key at its default value.
nlohmann::json default_config();

// Objects merge key by key; any other value, and the whole "dataset"
// object, is replaced.
nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& overlay);

// Throws ConfigError naming the offending location.
void validate_config(const nlohmann::json& document);

// Validates, then reads the typed fields.
ExperimentConfig parse_config(const nlohmann::json& document);

// Reads a JSON file and merges it over the defaults. Throws FileNotFound
// or ConfigError.
nlohmann::json read_config_file(const std::filesystem::path& path);

}  // namespace dpsyn

#endif  // DPSYN_CONFIG_HPP_

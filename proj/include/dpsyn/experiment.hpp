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


#ifndef DPSYN_EXPERIMENT_HPP_
#define DPSYN_EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dpsyn/config.hpp"
#include "dpsyn/data_source.hpp"
#include "dpsyn/denoiser.hpp"
#include "dpsyn/stages.hpp"
#include "dpsyn/toy_data.hpp"
#include "dpsyn/trainer.hpp"

// Turns an ExperimentConfig into datasets, stage plans and training runs.
namespace dpsyn {

struct ExperimentData {
  LabelledImages train;
  LabelledImages test;
  int num_classes = 0;
};

// Builtin datasets are drawn from the seed's "data" and "test-data" streams;
// IDX files are read as-is and checked against the configured image size.
ExperimentData load_experiment_data(const ExperimentConfig& config, std::uint64_t seed);

// n images of kind "dead-leaves" or "salt-pepper"; image i is seeded from
// the i-th draw of Rng::stream(seed, kind).
std::vector<Tensor> synthetic_images(const std::string& kind, std::size_t n, Index height,
                                     Index width, double p, std::uint64_t seed);

// "baseline" yields an untruncated single-phase plan.
StagePlan resolve_stage_plan(const ExperimentConfig& config);

// Method label used in reports, e.g. "dp-syngen-coarse".
std::string method_name(const ExperimentConfig& config);

DenoiserConfig model_config(const ExperimentConfig& config, int num_classes);

// The sources must outlive the returned run.
TrainRun make_train_run(const ExperimentConfig& config, const DataSource& synthetic,
                        const DataSource& private_data, int num_classes);

}  // namespace dpsyn

#endif  // DPSYN_EXPERIMENT_HPP_

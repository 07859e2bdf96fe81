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


#include "dpsyn/experiment.hpp"

#include <algorithm>
#include <limits>

#include "dpsyn/error.hpp"
#include "dpsyn/io.hpp"
#include "dpsyn/rng.hpp"
#include "dpsyn/synthgen.hpp"

namespace dpsyn {

namespace {

LabelledImages load_checked(const std::string& images, const std::string& labels, Index height,
                            Index width) {
  LabelledImages set = load_idx(images, labels);
  const Shape expected = image_shape(1, height, width);
  if (!set.images.empty() && set.images.front().shape() != expected)
    throw ConfigError("dataset " + images + " holds " + shape_string(set.images.front().shape()) +
                      " images, config expects " + shape_string(expected));
  return set;
}

int class_count(const std::vector<int>& labels) {
  const auto top = std::max_element(labels.begin(), labels.end());
  return top == labels.end() ? 0 : *top + 1;
}

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& config, std::uint64_t seed) {
  ExperimentData data;
  if (config.dataset.is_builtin()) {
    ToyDigitsParams params;
    params.height = config.height;
    params.width = config.width;
    data.train = make_toy_digits(config.dataset.train_size, Rng::stream(seed, "data").next_u64(), params);
    data.test = make_toy_digits(config.dataset.test_size, Rng::stream(seed, "test-data").next_u64(), params);
    data.num_classes = kToyDigitClasses;
  } else {
    data.train = load_checked(config.dataset.train_images, config.dataset.train_labels, config.height,
                              config.width);
    data.test = load_checked(config.dataset.test_images, config.dataset.test_labels, config.height,
                             config.width);
    data.num_classes = std::max(class_count(data.train.labels), class_count(data.test.labels));
  }
  if (data.train.size() == 0) throw ConfigError("dataset: training split is empty");
  return data;
}

std::vector<Tensor> synthetic_images(const std::string& kind, std::size_t n, Index height,
                                     Index width, double p, std::uint64_t seed) {
  Rng seeds = Rng::stream(seed, kind);
  std::vector<Tensor> out;
  out.reserve(n);
  if (kind == "dead-leaves") {
    DeadLeavesParams params;
    params.height = height;
    params.width = width;
    for (std::size_t i = 0; i < n; ++i) out.push_back(dead_leaves(params, seeds.next_u64()));
  } else if (kind == "salt-pepper") {
    SaltPepperParams params;
    params.height = height;
    params.width = width;
    params.p = p;
    for (std::size_t i = 0; i < n; ++i) out.push_back(salt_pepper(params, seeds.next_u64()));
  } else {
    throw ConfigError("unknown synthetic image kind '" + kind + "'");
  }
  return out;
}

StagePlan resolve_stage_plan(const ExperimentConfig& config) {
  const double inf = std::numeric_limits<double>::infinity();
  if (config.variant == "cleaning") {
    const auto [tau1, tau2] =
        config.thresholds ? *config.thresholds : cleaning_thresholds(default_cleaning_alpha_targets());
    return make_stage_plan(Variant::kCleaning, tau1, tau2);
  }
  double tau1 = 0.0;
  double tau2 = 0.0;
  if (config.thresholds) {
    std::tie(tau1, tau2) = *config.thresholds;
  } else {
    const CoarseThresholds detected = coarse_thresholds(CurveTable::standard());
    tau1 = detected.tau1;
    tau2 = detected.tau2;
  }
  if (config.variant == "coarse") return make_stage_plan(Variant::kCoarse, tau1, tau2);
  if (config.variant == "finetune" || config.variant == "baseline")
    return make_stage_plan(Variant::kFineTune, tau1, inf);
  throw ConfigError("unknown variant '" + config.variant + "'");
}

std::string method_name(const ExperimentConfig& config) {
  const std::string privacy = config.dp_enabled ? "dp-" : "";
  if (config.variant == "baseline") return privacy + "baseline";
  return privacy + "syngen-" + config.variant;
}

DenoiserConfig model_config(const ExperimentConfig& config, int num_classes) {
  DenoiserConfig model;
  model.height = config.height;
  model.width = config.width;
  model.hidden = config.hidden;
  model.num_classes = config.conditional ? num_classes : 0;
  return model;
}

TrainRun make_train_run(const ExperimentConfig& config, const DataSource& synthetic,
                        const DataSource& private_data, int num_classes) {
  TrainRun run;
  run.model = model_config(config, num_classes);
  run.plan = resolve_stage_plan(config);
  run.pretrain = config.variant != "baseline";
  run.synthetic = run.pretrain ? &synthetic : nullptr;
  run.private_data = &private_data;
  run.phase1.max_epochs = config.pretrain_max_epochs;
  run.phase1.batch_size = config.batch_size;
  run.phase1.learning_rate = config.pretrain_learning_rate;
  run.phase2.epochs = config.private_epochs;
  run.phase2.differentially_private = config.dp_enabled;
  run.phase2.batch_size = config.dp_enabled ? config.lot_size : config.batch_size;
  run.phase2.learning_rate = config.learning_rate;
  run.dp.epsilon = config.epsilon;
  run.dp.delta = config.delta;
  run.dp.clip_norm = config.clip_norm;
  run.dp.multiplicity = config.multiplicity;
  if (config.noise_multiplier) run.dp.noise_multiplier = *config.noise_multiplier;
  return run;
}

}  // namespace dpsyn

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

#ifndef DPSYN_ADAM_HPP_
#define DPSYN_ADAM_HPP_

#include <cstdint>

#include <Eigen/Core>

#include "dpsyn/denoiser.hpp"
#include "dpsyn/gradient.hpp"

namespace dpsyn {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_parameters(Eigen::Index n, double learning_rate = 3e-4);
};

// Bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const GradientVector& grad);

inline void adam_step(AdamState& state, DenoiserParams& params, const GradientVector& grad) {
  adam_step(state, params.values(), grad);
}

}  // namespace dpsyn

#endif  // DPSYN_ADAM_HPP_

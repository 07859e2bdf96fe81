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

#include "dpsyn/adam.hpp"

#include <cmath>

#include "dpsyn/error.hpp"

namespace dpsyn {

AdamState AdamState::for_parameters(Eigen::Index n, double learning_rate) {
  AdamState s;
  s.first_moment = Eigen::VectorXd::Zero(n);
  s.second_moment = Eigen::VectorXd::Zero(n);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const GradientVector& grad) {
  const Eigen::Index n = params.size();
  if (grad.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
    throw InvalidArgument("adam_step: gradient or moments not aligned with parameters");
  if (!grad.values().allFinite()) throw NumericalError("adam_step: non-finite gradient");
  const Eigen::VectorXd& g = grad.values();
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * g;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * g.cwiseProduct(g);
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  params.array() -= state.learning_rate * (state.first_moment.array() / bias1) /
                    ((state.second_moment.array() / bias2).sqrt() + state.epsilon);
}

}  // namespace dpsyn

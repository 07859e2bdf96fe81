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

#include "dpsyn/gradient.hpp"

#include <cmath>
#include <string>

#include "dpsyn/error.hpp"

namespace dpsyn {

LossAndGradient value_and_gradient(Eigen::Index parameter_count,
                                   const std::function<ad::Var(ad::Tape&, double*)>& loss) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(parameter_count);
  ad::Tape tape;
  const ad::Var out = loss(tape, grad.data());
  const double value = tape.scalar(out);
  if (!std::isfinite(value)) throw NumericalError("loss is not finite");
  tape.backward(out);
  return {value, GradientVector(std::move(grad))};
}

std::vector<GradientVector> per_sample_gradients(Eigen::Index parameter_count,
                                                 const ExampleLoss& loss, std::size_t batch_size,
                                                 std::vector<double>* losses) {
  if (batch_size == 0) throw InvalidArgument("per_sample_gradients: empty batch");
  std::vector<GradientVector> out;
  out.reserve(batch_size);
  if (losses) losses->assign(batch_size, 0.0);
  for (std::size_t i = 0; i < batch_size; ++i) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(parameter_count);
    ad::Tape tape;
    const ad::Var v = loss(tape, grad.data(), i);
    const double value = tape.scalar(v);
    if (!std::isfinite(value))
      throw NumericalError("non-finite loss on example " + std::to_string(i));
    tape.backward(v);
    if (losses) (*losses)[i] = value;
    out.emplace_back(std::move(grad));
  }
  return out;
}

}  // namespace dpsyn

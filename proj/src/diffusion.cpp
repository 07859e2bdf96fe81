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

#include "dpsyn/diffusion.hpp"

namespace dpsyn {

Tensor edm_forward(const Tensor& x0, double sigma, const Tensor& eta) {
  if (x0.shape() != eta.shape()) throw InvalidArgument("edm_forward: eta shape differs from x0");
  return Tensor(x0.shape(), edm_forward(x0.data(), sigma, eta.data()));
}

Tensor ddpm_forward(const Tensor& x0, Index t, const DdpmSchedule& schedule, const Tensor& eta) {
  if (x0.shape() != eta.shape()) throw InvalidArgument("ddpm_forward: eta shape differs from x0");
  return Tensor(x0.shape(), ddpm_forward(x0.data(), t, schedule, eta.data()));
}

DdpmSchedule::DdpmSchedule(Eigen::VectorXd betas) : betas_(std::move(betas)) {
  if (betas_.size() == 0) throw InvalidArgument("DdpmSchedule: empty schedule");
  alpha_bars_.resize(betas_.size() + 1);
  alpha_bars_[0] = 1.0;
  for (Index t = 1; t <= betas_.size(); ++t) {
    const double b = betas_[t - 1];
    if (!(b >= 0.0 && b < 1.0))
      throw InvalidArgument("DdpmSchedule: beta_" + std::to_string(t) + " outside [0, 1)");
    alpha_bars_[t] = alpha_bars_[t - 1] * (1.0 - b);
  }
}

DdpmSchedule DdpmSchedule::linear(double beta_start, double beta_end, Index steps) {
  if (steps < 1) throw InvalidArgument("DdpmSchedule::linear: need at least one step");
  Eigen::VectorXd betas(steps);
  for (Index i = 0; i < steps; ++i)
    betas[i] = steps == 1 ? beta_start
                          : beta_start + (beta_end - beta_start) * static_cast<double>(i) /
                                             static_cast<double>(steps - 1);
  return DdpmSchedule(std::move(betas));
}

double DdpmSchedule::alpha_bar(Index t) const {
  if (t < 0 || t > steps())
    throw InvalidArgument("DdpmSchedule: step " + std::to_string(t) + " out of range");
  return alpha_bars_[t];
}

}  // namespace dpsyn

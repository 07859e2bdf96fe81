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

#ifndef DPSYN_DIFFUSION_HPP_
#define DPSYN_DIFFUSION_HPP_

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "dpsyn/error.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

// Signal retention of the EDM forward process, 1 / (1 + sigma^2).
template <typename Scalar>
Scalar alpha_bar_of_sigma(Scalar sigma) {
  if (!(sigma >= Scalar(0)))
    throw InvalidArgument("alpha_bar_of_sigma: sigma must be nonnegative");
  return Scalar(1) / (Scalar(1) + sigma * sigma);
}

// Signal-to-noise ratio 1 / sigma^2.
template <typename Scalar>
Scalar snr_of_sigma(Scalar sigma) {
  if (!(sigma > Scalar(0))) throw InvalidArgument("snr_of_sigma: sigma must be positive");
  return Scalar(1) / (sigma * sigma);
}

// Inverse of alpha_bar_of_sigma on (0, 1].
template <typename Scalar>
Scalar sigma_of_alpha_bar(Scalar alpha_bar) {
  if (!(alpha_bar > Scalar(0) && alpha_bar <= Scalar(1)))
    throw InvalidArgument("sigma_of_alpha_bar: alpha_bar must lie in (0, 1]");
  using std::sqrt;
  return sqrt(Scalar(1) / alpha_bar - Scalar(1));
}

// Variance-preserving EDM forward state x0 / sqrt(1 + s^2) + s eta / sqrt(1 + s^2).
template <typename DerivedX, typename DerivedEta>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> edm_forward(
    const Eigen::MatrixBase<DerivedX>& x0, typename DerivedX::Scalar sigma,
    const Eigen::MatrixBase<DerivedEta>& eta) {
  using Scalar = typename DerivedX::Scalar;
  if (!(sigma >= Scalar(0))) throw InvalidArgument("edm_forward: sigma must be nonnegative");
  if (x0.rows() != eta.rows() || x0.cols() != eta.cols())
    throw InvalidArgument("edm_forward: eta shape differs from x0");
  using std::sqrt;
  const Scalar norm = sqrt(Scalar(1) + sigma * sigma);
  return (x0 + sigma * eta) / norm;
}

Tensor edm_forward(const Tensor& x0, double sigma, const Tensor& eta);

// Discrete DDPM variance schedule beta_1..beta_T with cumulative retention
// alpha_bar_t = prod_{s<=t} (1 - beta_s), alpha_bar_0 = 1.
class DdpmSchedule {
 public:
  explicit DdpmSchedule(Eigen::VectorXd betas);

  static DdpmSchedule linear(double beta_start = 1e-4, double beta_end = 0.02, Index steps = 1000);

  Index steps() const { return betas_.size(); }
  double beta(Index t) const { return betas_[t - 1]; }
  // t in [0, T].
  double alpha_bar(Index t) const;
  const Eigen::VectorXd& betas() const { return betas_; }
  // Index t = 0..T.
  const Eigen::VectorXd& alpha_bars() const { return alpha_bars_; }

  // EDM-equivalent noise level sqrt((1 - a) / a) at step t.
  double sigma(Index t) const { return sigma_of_alpha_bar(alpha_bar(t)); }

 private:
  Eigen::VectorXd betas_;
  Eigen::VectorXd alpha_bars_;
};

// sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eta.
template <typename DerivedX, typename DerivedEta>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> ddpm_forward(
    const Eigen::MatrixBase<DerivedX>& x0, Index t, const DdpmSchedule& schedule,
    const Eigen::MatrixBase<DerivedEta>& eta) {
  if (t < 1 || t > schedule.steps())
    throw InvalidArgument("ddpm_forward: step " + std::to_string(t) + " outside [1, " +
                          std::to_string(schedule.steps()) + "]");
  if (x0.rows() != eta.rows() || x0.cols() != eta.cols())
    throw InvalidArgument("ddpm_forward: eta shape differs from x0");
  const double a = schedule.alpha_bar(t);
  return std::sqrt(a) * x0 + std::sqrt(1.0 - a) * eta;
}

Tensor ddpm_forward(const Tensor& x0, Index t, const DdpmSchedule& schedule, const Tensor& eta);

}  // namespace dpsyn

#endif  // DPSYN_DIFFUSION_HPP_

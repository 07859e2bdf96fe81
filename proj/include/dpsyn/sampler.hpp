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

#ifndef DPSYN_SAMPLER_HPP_
#define DPSYN_SAMPLER_HPP_

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/denoiser.hpp"
#include "dpsyn/diffusion.hpp"
#include "dpsyn/rng.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

// Karras-warped noise levels from sigma_max down to sigma_min.
struct SamplerGrid {
  double sigma_max = 80.0;
  double sigma_min = 0.002;
  int steps = 64;
  double rho = 7.0;
  // Clamp each denoised estimate to the model's image range before the
  // update.
  bool clip_denoised = false;

  void validate() const;
  // Strictly decreasing, sigmas().front() == sigma_max and
  // sigmas().back() == sigma_min exactly.
  std::vector<double> sigmas() const;
};

// D(x, sigma) for a block of column samples; `step` is the grid index.
using DenoiseFn =
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x, double sigma, std::size_t step)>;

// Probability-flow integration over `sigmas` (decreasing) followed by a
// final step to sigma = 0, which returns the last denoised estimate.
// Throws NumericalError naming the step when the state stops being finite.
Eigen::MatrixXd ddim_integrate(const DenoiseFn& denoise, Eigen::MatrixXd x,
                               const std::vector<double>& sigmas);

// Deterministic DDIM sampling from x = sigma_max * eta. labels is empty or
// holds one class per sample.
std::vector<Tensor> ddim_sample(const DenoiserParams& params, const SamplerGrid& grid, std::size_t n,
                                Rng& rng, const std::vector<int>& labels = {});

// Half-open ln sigma band (lo, hi].
struct LnSigmaBand {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double ln_sigma) const { return ln_sigma > lo && ln_sigma <= hi; }
};

// Band covering DDPM steps t in (t_lo, t_hi] of `schedule`, mapped through
// sigma_t = sqrt((1 - alpha_bar_t) / alpha_bar_t).
LnSigmaBand ddpm_step_band(const DdpmSchedule& schedule, int t_lo, int t_hi);

// Band of sampler steps by position along the trajectory: level i of an
// N-level grid sits at t / T = 1 - i / (N - 1), so sigma_max is t / T = 1 and
// sigma_min is 0. Contains levels with lo < t / T <= hi; the default is the
// middle half of the steps.
struct StepBand {
  double lo = 0.25;
  double hi = 0.75;
  bool contains(std::size_t level, std::size_t levels) const;
};

// As ddim_sample, but steps inside `band` use params_context and all other
// steps use params_other.
std::vector<Tensor> stage_switch_sample(const DenoiserParams& params_context,
                                        const DenoiserParams& params_other, LnSigmaBand band,
                                        const SamplerGrid& grid, std::size_t n, Rng& rng,
                                        const std::vector<int>& labels = {});
std::vector<Tensor> stage_switch_sample(const DenoiserParams& params_context,
                                        const DenoiserParams& params_other, StepBand band,
                                        const SamplerGrid& grid, std::size_t n, Rng& rng,
                                        const std::vector<int>& labels = {});

// Noises x to sigma = exp(tau) with fresh eta, then denoises from there: one
// step to the nearest grid level at or below exp(tau), then down the grid.
Tensor forward_then_clean(const DenoiserParams& params, const Tensor& x, double tau,
                          const SamplerGrid& grid, Rng& rng, int label = -1);

}  // namespace dpsyn

#endif  // DPSYN_SAMPLER_HPP_

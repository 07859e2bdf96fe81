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

#include "dpsyn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

void check_params(const DenoiserParams& params, const std::vector<int>& labels, std::size_t n) {
  if (params.parameter_count() == 0) throw InvalidArgument("sampler: empty denoiser");
  if (!labels.empty() && labels.size() != n)
    throw InvalidArgument("sampler: need one label per sample");
}

DenoiseFn batch_denoiser(const DenoiserParams& params, const std::vector<int>& labels, bool clip) {
  const DenoiserConfig& c = params.config();
  const double a = c.pixel_shift;
  const double b = c.pixel_scale + c.pixel_shift;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return [&params, &labels, clip, lo, hi](const Eigen::MatrixXd& x, double sigma, std::size_t) {
    Eigen::MatrixXd d = denoise_batch(params, x, Eigen::VectorXd::Constant(x.cols(), sigma), labels);
    if (clip) d = d.cwiseMax(lo).cwiseMin(hi);
    return d;
  };
}

}  // namespace

void SamplerGrid::validate() const {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max))
    throw ConfigError("sampler grid: need 0 < sigma_min < sigma_max");
  if (steps < 2) throw ConfigError("sampler grid: need at least two levels");
  if (!(rho > 0.0)) throw ConfigError("sampler grid: rho must be positive");
}

std::vector<double> SamplerGrid::sigmas() const {
  validate();
  const double a = std::pow(sigma_max, 1.0 / rho);
  const double b = std::pow(sigma_min, 1.0 / rho);
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double f = static_cast<double>(i) / (steps - 1);
    out[static_cast<std::size_t>(i)] = std::pow(a + f * (b - a), rho);
  }
  out.front() = sigma_max;
  out.back() = sigma_min;
  return out;
}

Eigen::MatrixXd ddim_integrate(const DenoiseFn& denoise, Eigen::MatrixXd x,
                               const std::vector<double>& sigmas) {
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double sigma = sigmas[i];
    const double next = i + 1 < sigmas.size() ? sigmas[i + 1] : 0.0;
    const Eigen::MatrixXd d = denoise(x, sigma, i);
    if (next == 0.0) {
      x = d;
    } else {
      x += ((next - sigma) / sigma) * (x - d);
    }
    if (!x.allFinite())
      throw NumericalError("ddim: non-finite state at step " + std::to_string(i) + " (sigma " +
                           std::to_string(sigma) + ")");
  }
  return x;
}

std::vector<Tensor> ddim_sample(const DenoiserParams& params, const SamplerGrid& grid, std::size_t n,
                                Rng& rng, const std::vector<int>& labels) {
  const std::vector<double> sigmas = grid.sigmas();
  if (n == 0) return {};
  check_params(params, labels, n);
  const Index p = params.config().pixels();
  Eigen::MatrixXd x = grid.sigma_max * rng.normal_matrix(p, static_cast<Index>(n));
  return unstack_columns(
      to_pixel_space(params.config(), ddim_integrate(batch_denoiser(params, labels, grid.clip_denoised), std::move(x), sigmas)),
      params.config().image_shape());
}

LnSigmaBand ddpm_step_band(const DdpmSchedule& schedule, int t_lo, int t_hi) {
  if (t_lo < 1 || t_hi <= t_lo || t_hi > schedule.steps())
    throw InvalidArgument("ddpm_step_band: need 1 <= t_lo < t_hi <= T");
  return {std::log(schedule.sigma(t_lo)), std::log(schedule.sigma(t_hi))};
}

namespace {

std::vector<Tensor> switch_sample(const DenoiserParams& params_context, const DenoiserParams& params_other,
                                  const std::function<bool(std::size_t, double)>& inside_band,
                                  const std::vector<double>& sigmas, const SamplerGrid& grid, std::size_t n,
                                  Rng& rng, const std::vector<int>& labels) {
  if (n == 0) return {};
  check_params(params_context, labels, n);
  check_params(params_other, labels, n);
  const DenoiserConfig& a = params_context.config();
  const DenoiserConfig& b = params_other.config();
  if (a.image_shape() != b.image_shape() || a.pixel_scale != b.pixel_scale || a.pixel_shift != b.pixel_shift)
    throw InvalidArgument("stage_switch_sample: models disagree on image shape or pixel range");
  const DenoiseFn inside = batch_denoiser(params_context, labels, grid.clip_denoised);
  const DenoiseFn outside = batch_denoiser(params_other, labels, grid.clip_denoised);
  const DenoiseFn switched = [&](const Eigen::MatrixXd& x, double sigma, std::size_t step) {
    return inside_band(step, sigma) ? inside(x, sigma, step) : outside(x, sigma, step);
  };
  const Index p = params_context.config().pixels();
  Eigen::MatrixXd x = grid.sigma_max * rng.normal_matrix(p, static_cast<Index>(n));
  return unstack_columns(to_pixel_space(a, ddim_integrate(switched, std::move(x), sigmas)), a.image_shape());
}

}  // namespace

bool StepBand::contains(std::size_t level, std::size_t levels) const {
  const double t = levels > 1 ? 1.0 - static_cast<double>(level) / static_cast<double>(levels - 1) : 0.0;
  return (lo <= 0.0 ? t >= 0.0 : t > lo) && t <= hi;
}

std::vector<Tensor> stage_switch_sample(const DenoiserParams& params_context,
                                        const DenoiserParams& params_other, LnSigmaBand band,
                                        const SamplerGrid& grid, std::size_t n, Rng& rng,
                                        const std::vector<int>& labels) {
  const std::vector<double> sigmas = grid.sigmas();
  if (!(band.lo < band.hi)) throw InvalidArgument("stage_switch_sample: empty band");
  if (band.hi < std::log(grid.sigma_min) || band.lo >= std::log(grid.sigma_max))
    throw InvalidArgument("stage_switch_sample: band lies outside the grid");
  return switch_sample(
      params_context, params_other,
      [&](std::size_t, double sigma) { return band.contains(std::log(sigma)); }, sigmas, grid, n,
      rng, labels);
}

std::vector<Tensor> stage_switch_sample(const DenoiserParams& params_context,
                                        const DenoiserParams& params_other, StepBand band,
                                        const SamplerGrid& grid, std::size_t n, Rng& rng,
                                        const std::vector<int>& labels) {
  const std::vector<double> sigmas = grid.sigmas();
  if (!(band.lo >= 0.0 && band.lo < band.hi && band.hi <= 1.0))
    throw InvalidArgument("stage_switch_sample: step band must satisfy 0 <= lo < hi <= 1");
  return switch_sample(
      params_context, params_other,
      [&](std::size_t step, double) { return band.contains(step, sigmas.size()); }, sigmas, grid,
      n, rng, labels);
}

Tensor forward_then_clean(const DenoiserParams& params, const Tensor& x, double tau,
                          const SamplerGrid& grid, Rng& rng, int label) {
  const std::vector<double> grid_sigmas = grid.sigmas();
  if (x.shape() != params.config().image_shape())
    throw InvalidArgument("forward_then_clean: image shape " + shape_string(x.shape()) +
                          " does not match model");
  // Allow for rounding in exp(log(sigma_min)).
  const double lo = std::log(grid.sigma_min) - 1e-12;
  const double hi = std::log(grid.sigma_max) + 1e-12;
  if (!(tau >= lo && tau <= hi)) throw InvalidArgument("forward_then_clean: tau outside the grid");
  const double sigma = std::clamp(std::exp(tau), grid.sigma_min, grid.sigma_max);
  const Eigen::VectorXd eta = rng.normal_vector(x.size());
  const DenoiserConfig& config = params.config();
  const Eigen::VectorXd x_model = to_model_space(config, x.data());
  Eigen::MatrixXd state = edm_forward(x_model, sigma, eta) * std::sqrt(1.0 + sigma * sigma);
  std::vector<double> sigmas = {sigma};
  for (double s : grid_sigmas)
    if (s < sigma) sigmas.push_back(s);
  const std::vector<int> labels = label >= 0 ? std::vector<int>{label} : std::vector<int>{};
  Eigen::MatrixXd out = ddim_integrate(batch_denoiser(params, labels, grid.clip_denoised), std::move(state), sigmas);
  return Tensor(x.shape(), to_pixel_space(config, out).col(0));
}

}  // namespace dpsyn

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

#include "dpsyn/denoiser.hpp"

#include <numbers>
#include <string>

#include "dpsyn/error.hpp"

namespace dpsyn {

Eigen::MatrixXd to_model_space(const DenoiserConfig& config, const Eigen::MatrixXd& pixels) {
  return (config.pixel_scale * pixels.array() + config.pixel_shift).matrix();
}

Eigen::MatrixXd to_pixel_space(const DenoiserConfig& config, const Eigen::MatrixXd& model) {
  return ((model.array() - config.pixel_shift) / config.pixel_scale).matrix();
}
namespace {

void validate(const DenoiserConfig& c) {
  if (c.channels <= 0 || c.height <= 0 || c.width <= 0)
    throw InvalidArgument("DenoiserConfig: image dimensions must be positive");
  if (c.num_classes < 0 || c.fourier_features < 0)
    throw InvalidArgument("DenoiserConfig: negative widths");
  if (!(c.sigma_data > 0.0)) throw InvalidArgument("DenoiserConfig: sigma_data must be positive");
}

}  // namespace

MlpLayout DenoiserConfig::layout() const {
  std::vector<Index> widths;
  widths.push_back(input_width());
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(pixels());
  return MlpLayout(std::move(widths));
}

DenoiserParams::DenoiserParams(DenoiserConfig config, Eigen::VectorXd values,
                               Eigen::VectorXd frequencies)
    : config_(std::move(config)),
      layout_(config_.layout()),
      values_(std::move(values)),
      frequencies_(std::move(frequencies)) {
  validate(config_);
  if (values_.size() != layout_.parameter_count())
    throw InvalidArgument("DenoiserParams: expected " + std::to_string(layout_.parameter_count()) +
                          " values, got " + std::to_string(values_.size()));
  if (frequencies_.size() != config_.fourier_features)
    throw InvalidArgument("DenoiserParams: frequency count does not match config");
}

DenoiserParams DenoiserParams::init(const DenoiserConfig& config, Rng& rng,
                                    bool zero_output_layer) {
  validate(config);
  Eigen::VectorXd frequencies = config.fourier_scale * rng.normal_vector(config.fourier_features);
  const MlpLayout layout = config.layout();
  Eigen::VectorXd values = mlp_init(layout, rng, zero_output_layer);
  return DenoiserParams(config, std::move(values), std::move(frequencies));
}

DenoiserParams DenoiserParams::zeros(const DenoiserConfig& config, Rng& rng) {
  DenoiserParams p = init(config, rng, true);
  p.values_.setZero();
  return p;
}

ad::Var denoiser_graph(ad::Tape& tape, const DenoiserParams& params, double* grad_sink,
                       const Eigen::MatrixXd& noisy, const Eigen::VectorXd& sigmas,
                       const std::vector<int>& labels) {
  const DenoiserConfig& cfg = params.config();
  const Index n = noisy.cols();
  if (noisy.rows() != cfg.pixels())
    throw InvalidArgument("denoise: input has " + std::to_string(noisy.rows()) +
                          " values, model expects " + std::to_string(cfg.pixels()));
  if (sigmas.size() != n) throw InvalidArgument("denoise: need one sigma per sample");
  if (!labels.empty() && static_cast<Index>(labels.size()) != n)
    throw InvalidArgument("denoise: need one label per sample");

  Eigen::VectorXd skip(n), out(n), in(n);
  Eigen::MatrixXd conditioning(cfg.num_classes + 2 * cfg.fourier_features, n);
  conditioning.setZero();
  const auto& freqs = params.frequencies();
  for (Index j = 0; j < n; ++j) {
    const double sigma = sigmas[j];
    if (!std::isfinite(sigma) || !(sigma > 0.0))
      throw InvalidArgument("denoise: sigma must be positive and finite, got " +
                            std::to_string(sigma));
    const EdmScaling<double> s = edm_scaling(sigma, cfg.sigma_data);
    skip[j] = s.skip;
    out[j] = s.out;
    in[j] = s.in;
    if (!labels.empty() && labels[static_cast<std::size_t>(j)] >= 0) {
      const int label = labels[static_cast<std::size_t>(j)];
      if (label >= cfg.num_classes)
        throw InvalidArgument("denoise: label " + std::to_string(label) + " out of range");
      conditioning(label, j) = 1.0;
    }
    for (Index f = 0; f < cfg.fourier_features; ++f) {
      const double angle = 2.0 * std::numbers::pi * freqs[f] * s.noise;
      conditioning(cfg.num_classes + f, j) = std::cos(angle);
      conditioning(cfg.num_classes + cfg.fourier_features + f, j) = std::sin(angle);
    }
  }

  const ad::Var x = tape.constant(noisy);
  const ad::Var net_in = tape.concat_rows({tape.scale_columns(x, in), tape.constant(conditioning)});
  const ad::Var f = mlp_forward(tape, params.layout(), params.values(), grad_sink, net_in,
                                cfg.activation);
  return tape.add(tape.scale_columns(x, skip), tape.scale_columns(f, out));
}

Eigen::MatrixXd denoise_batch(const DenoiserParams& params, const Eigen::MatrixXd& noisy,
                              const Eigen::VectorXd& sigmas, const std::vector<int>& labels) {
  ad::Tape tape;
  const ad::Var d = denoiser_graph(tape, params, nullptr, noisy, sigmas, labels);
  return tape.value(d);
}

Tensor denoise(const DenoiserParams& params, const Tensor& x, double sigma, int label) {
  if (x.shape() != params.config().image_shape())
    throw InvalidArgument("denoise: tensor shape " + shape_string(x.shape()) +
                          " does not match model shape " +
                          shape_string(params.config().image_shape()));
  Eigen::VectorXd sigmas = Eigen::VectorXd::Constant(1, sigma);
  std::vector<int> labels;
  if (label >= 0) labels.push_back(label);
  const Eigen::MatrixXd out = denoise_batch(params, x.data(), sigmas, labels);
  return Tensor(x.shape(), out.col(0));
}

std::vector<GradientVector> per_sample_gradients(const DenoiserParams& params,
                                                 const ExampleLoss& loss, std::size_t batch_size,
                                                 std::vector<double>* losses) {
  return per_sample_gradients(params.parameter_count(), loss, batch_size, losses);
}

}  // namespace dpsyn

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

#ifndef DPSYN_DENOISER_HPP_
#define DPSYN_DENOISER_HPP_

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/autodiff.hpp"
#include "dpsyn/gradient.hpp"
#include "dpsyn/mlp.hpp"
#include "dpsyn/rng.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

// EDM preconditioning coefficients for noise level sigma.
template <typename Scalar>
struct EdmScaling {
  Scalar skip;
  Scalar out;
  Scalar in;
  Scalar noise;
};

template <typename Scalar>
EdmScaling<Scalar> edm_scaling(Scalar sigma, Scalar sigma_data) {
  using std::log;
  using std::sqrt;
  const Scalar total = sigma * sigma + sigma_data * sigma_data;
  return {sigma_data * sigma_data / total, sigma * sigma_data / sqrt(total), Scalar(1) / sqrt(total),
          log(sigma) / Scalar(4)};
}

struct DenoiserConfig {
  Index channels = 1;
  Index height = 16;
  Index width = 16;
  // One-hot label width appended to the input; 0 for unconditional models.
  Index num_classes = 0;
  std::vector<Index> hidden = {256, 256};
  // Number of Fourier frequencies; the embedding has twice as many features.
  Index fourier_features = 16;
  double fourier_scale = 1.0;
  double sigma_data = 0.5;
  Activation activation = Activation::kSilu;
  // Images enter the diffusion as pixel_scale * pixel + pixel_shift; the
  // default maps [0, 1] pixels to [-1, 1].
  double pixel_scale = 2.0;
  double pixel_shift = -1.0;

  Index pixels() const { return channels * height * width; }
  Index input_width() const { return pixels() + num_classes + 2 * fourier_features; }
  Shape image_shape() const { return {channels, height, width}; }
  MlpLayout layout() const;
};

// Pixel columns to the model's data space and back.
Eigen::MatrixXd to_model_space(const DenoiserConfig& config, const Eigen::MatrixXd& pixels);
Eigen::MatrixXd to_pixel_space(const DenoiserConfig& config, const Eigen::MatrixXd& model);

// Trainable weights of the sigma-conditioned MLP denoiser plus its fixed
// Fourier frequencies.
class DenoiserParams {
 public:
  DenoiserParams() = default;
  DenoiserParams(DenoiserConfig config, Eigen::VectorXd values, Eigen::VectorXd frequencies);

  // Random weights; the output layer starts at zero when zero_output_layer
  // is set, so the fresh model returns exactly its skip connection.
  static DenoiserParams init(const DenoiserConfig& config, Rng& rng, bool zero_output_layer = true);
  static DenoiserParams zeros(const DenoiserConfig& config, Rng& rng);

  const DenoiserConfig& config() const { return config_; }
  const MlpLayout& layout() const { return layout_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& frequencies() const { return frequencies_; }
  Index parameter_count() const { return values_.size(); }

 private:
  DenoiserConfig config_;
  MlpLayout layout_;
  Eigen::VectorXd values_;
  Eigen::VectorXd frequencies_;
};

// Builds D(x, sigma) = c_skip x + c_out F(c_in x, c_noise, label) for the
// columns of `noisy`. labels may be empty (unconditional); -1 entries mean
// "no label". Returns the output node.
ad::Var denoiser_graph(ad::Tape& tape, const DenoiserParams& params, double* grad_sink,
                       const Eigen::MatrixXd& noisy, const Eigen::VectorXd& sigmas,
                       const std::vector<int>& labels);

// Batched forward evaluation; columns are samples.
Eigen::MatrixXd denoise_batch(const DenoiserParams& params, const Eigen::MatrixXd& noisy,
                              const Eigen::VectorXd& sigmas, const std::vector<int>& labels = {});

// Single-image denoiser evaluation.
Tensor denoise(const DenoiserParams& params, const Tensor& x, double sigma, int label = -1);

// Per-example gradients against the denoiser's parameter vector.
std::vector<GradientVector> per_sample_gradients(const DenoiserParams& params,
                                                 const ExampleLoss& loss, std::size_t batch_size,
                                                 std::vector<double>* losses = nullptr);

}  // namespace dpsyn

#endif  // DPSYN_DENOISER_HPP_

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

#include "dpsyn/edm_loss.hpp"

#include <cmath>

#include "dpsyn/diffusion.hpp"
#include "dpsyn/error.hpp"

namespace dpsyn {

ad::Var edm_loss_graph(ad::Tape& tape, const DenoiserParams& params, double* grad_sink,
                       const Eigen::MatrixXd& x0, const Eigen::VectorXd& sigmas,
                       const Eigen::MatrixXd& eta, const std::vector<int>& labels) {
  const Index n = x0.cols();
  if (n == 0) throw InvalidArgument("edm_loss: no samples");
  if (sigmas.size() != n) throw InvalidArgument("edm_loss: need one sigma per sample");
  if (eta.rows() != x0.rows() || eta.cols() != n)
    throw InvalidArgument("edm_loss: eta shape differs from x0");
  const double sigma_data = params.config().sigma_data;
  Eigen::MatrixXd noisy(x0.rows(), n);
  Eigen::VectorXd weights(n);
  for (Index j = 0; j < n; ++j) {
    const double sigma = sigmas[j];
    noisy.col(j) = edm_forward(x0.col(j), sigma, eta.col(j)) * std::sqrt(1.0 + sigma * sigma);
    weights[j] = edm_loss_weight(sigma, sigma_data) / static_cast<double>(n);
  }
  const ad::Var d = denoiser_graph(tape, params, grad_sink, noisy, sigmas, labels);
  const ad::Var residual = tape.sub(d, tape.constant(x0));
  return tape.weighted_column_sq_norms(residual, weights);
}

ad::Var edm_loss(ad::Tape& tape, const DenoiserParams& params, double* grad_sink, const Tensor& x0,
                 const EdmLossConfig& cfg, Rng& rng, int label, SigmaLog* log) {
  if (x0.shape() != params.config().image_shape())
    throw InvalidArgument("edm_loss: example shape " + shape_string(x0.shape()) +
                          " does not match model");
  if (cfg.sigma_data != params.config().sigma_data)
    throw InvalidArgument("edm_loss: sigma_data differs between loss config and model");
  const double ln_sigma = sample_ln_sigma(cfg.sigma_law, rng);
  if (log) log->record(ln_sigma, cfg.sigma_law.admits(ln_sigma));
  Eigen::VectorXd sigmas = Eigen::VectorXd::Constant(1, std::exp(ln_sigma));
  const Eigen::MatrixXd eta = rng.normal_matrix(x0.size(), 1);
  std::vector<int> labels;
  if (label >= 0) labels.push_back(label);
  return edm_loss_graph(tape, params, grad_sink, x0.data(), sigmas, eta, labels);
}

double edm_loss_value(const DenoiserParams& params, const Tensor& x0, const EdmLossConfig& cfg,
                      Rng& rng, int label, SigmaLog* log) {
  ad::Tape tape;
  return tape.scalar(edm_loss(tape, params, nullptr, x0, cfg, rng, label, log));
}

}  // namespace dpsyn

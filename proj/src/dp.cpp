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

#include "dpsyn/dp.hpp"

#include <cmath>

#include "dpsyn/error.hpp"

namespace dpsyn {

void DPConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("dp: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("dp: delta must lie in (0, 1)");
  if (!(clip_norm > 0.0)) throw ConfigError("dp: clip norm must be positive");
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0))
    throw ConfigError("dp: sampling rate must lie in (0, 1]");
  if (steps < 1) throw ConfigError("dp: steps must be positive");
  if (noise_multiplier < 0.0) throw ConfigError("dp: noise multiplier must be positive");
  if (multiplicity < 1) throw ConfigError("dp: multiplicity must be at least 1");
}

GradientVector clip(const GradientVector& g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw InvalidArgument("clip: clip norm must be positive");
  if (!std::isfinite(g.norm())) throw NumericalError("clip: non-finite gradient");
  GradientVector out = g;
  if (g.norm() > clip_norm) out.scale(clip_norm / g.norm());
  return out;
}

GradientVector noisy_aggregate(const std::vector<GradientVector>& grads, Eigen::Index parameter_count,
                               double clip_norm, double noise_multiplier, double expected_lot_size,
                               Rng& rng) {
  if (!(expected_lot_size > 0.0)) throw InvalidArgument("noisy_aggregate: lot size must be positive");
  if (noise_multiplier < 0.0) throw InvalidArgument("noisy_aggregate: negative noise multiplier");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(parameter_count);
  for (const auto& g : grads) {
    if (g.size() != parameter_count) throw InvalidArgument("noisy_aggregate: gradient size mismatch");
    sum += clip(g, clip_norm).values();
  }
  if (noise_multiplier > 0.0) sum += (noise_multiplier * clip_norm) * rng.normal_vector(parameter_count);
  return GradientVector(sum / expected_lot_size);
}

std::vector<std::size_t> poisson_lot(std::size_t n, double q, Rng& rng) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("poisson_lot: rate must lie in (0, 1]");
  std::vector<std::size_t> lot;
  for (std::size_t i = 0; i < n; ++i)
    if (rng.bernoulli(q)) lot.push_back(i);
  return lot;
}

std::vector<double> draw_sigmas(const SigmaDistribution& law, int k, Rng& rng, SigmaLog* log) {
  if (k < 1) throw InvalidArgument("draw_sigmas: k must be at least 1");
  std::vector<double> sigmas(static_cast<std::size_t>(k));
  for (auto& s : sigmas) {
    const double ln_sigma = sample_ln_sigma(law, rng);
    if (log) log->record(ln_sigma, law.admits(ln_sigma));
    s = std::exp(ln_sigma);
  }
  return sigmas;
}

ad::Var multiplicity_loss(ad::Tape& tape, const DenoiserParams& params, double* grad_sink,
                          const Tensor& x0, const std::vector<double>& sigmas, Rng& rng, int label,
                          bool shared_eta) {
  if (sigmas.empty()) throw InvalidArgument("multiplicity_loss: empty sigma list");
  if (x0.shape() != params.config().image_shape())
    throw InvalidArgument("multiplicity_loss: example shape " + shape_string(x0.shape()) +
                          " does not match model");
  const Index k = static_cast<Index>(sigmas.size());
  const Index p = x0.size();
  const Eigen::MatrixXd x = x0.data().replicate(1, k);
  Eigen::MatrixXd eta;
  if (shared_eta) {
    eta = rng.normal_vector(p).replicate(1, k);
  } else {
    eta = rng.normal_matrix(p, k);
  }
  const Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(sigmas.data(), k);
  std::vector<int> labels;
  if (label >= 0) labels.assign(static_cast<std::size_t>(k), label);
  return edm_loss_graph(tape, params, grad_sink, x, s, eta, labels);
}

}  // namespace dpsyn

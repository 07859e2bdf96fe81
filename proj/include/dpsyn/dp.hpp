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

#ifndef DPSYN_DP_HPP_
#define DPSYN_DP_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpsyn/autodiff.hpp"
#include "dpsyn/denoiser.hpp"
#include "dpsyn/edm_loss.hpp"
#include "dpsyn/gradient.hpp"
#include "dpsyn/rng.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

struct DPConfig {
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;
  double sampling_rate = 0.01;
  std::int64_t steps = 1;
  // Zero until calibrated.
  double noise_multiplier = 0.0;
  int multiplicity = 16;

  void validate() const;
  bool calibrated() const { return noise_multiplier > 0.0; }
};

// g * min(1, C / ||g||). Throws NumericalError on a non-finite gradient.
GradientVector clip(const GradientVector& g, double clip_norm);

// (sum_i clip(g_i, C) + zeta) / L with zeta ~ N(0, (sigma C)^2 I). `grads`
// may be empty.
GradientVector noisy_aggregate(const std::vector<GradientVector>& grads, Eigen::Index parameter_count,
                               double clip_norm, double noise_multiplier, double expected_lot_size,
                               Rng& rng);

// Poisson lot: each of n indices joins independently with probability q.
// Indices come out sorted.
std::vector<std::size_t> poisson_lot(std::size_t n, double sampling_rate, Rng& rng);

// k independent draws of sigma from `law`, each logged when `log` is set.
std::vector<double> draw_sigmas(const SigmaDistribution& law, int k, Rng& rng,
                                SigmaLog* log = nullptr);

// (1/k) sum_j EDM loss of x0 at sigmas[j]. Each level draws its own eta
// unless `shared_eta` is set, in which case one eta is reused.
ad::Var multiplicity_loss(ad::Tape& tape, const DenoiserParams& params, double* grad_sink,
                          const Tensor& x0, const std::vector<double>& sigmas, Rng& rng,
                          int label = -1, bool shared_eta = false);

}  // namespace dpsyn

#endif  // DPSYN_DP_HPP_

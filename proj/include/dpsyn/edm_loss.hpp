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

#ifndef DPSYN_EDM_LOSS_HPP_
#define DPSYN_EDM_LOSS_HPP_

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/autodiff.hpp"
#include "dpsyn/denoiser.hpp"
#include "dpsyn/rng.hpp"
#include "dpsyn/sigma.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

struct EdmLossConfig {
  double sigma_data = 0.5;
  SigmaDistribution sigma_law;
};

// EDM loss weight (sigma^2 + sigma_data^2) / (sigma sigma_data)^2.
template <typename Scalar>
Scalar edm_loss_weight(Scalar sigma, Scalar sigma_data) {
  return (sigma * sigma + sigma_data * sigma_data) / (sigma * sigma * sigma_data * sigma_data);
}

// Running record of ln sigma draws and predicate compliance.
struct SigmaLog {
  std::size_t count = 0;
  std::size_t violations = 0;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  // Optional full trace.
  std::vector<double>* trace = nullptr;

  void record(double ln_sigma, bool admitted) {
    ++count;
    if (!admitted) ++violations;
    sum += ln_sigma;
    min = std::min(min, ln_sigma);
    max = std::max(max, ln_sigma);
    if (trace) trace->push_back(ln_sigma);
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  void merge(const SigmaLog& other) {
    count += other.count;
    violations += other.violations;
    sum += other.sum;
    min = std::min(min, other.min);
    max = std::max(max, other.max);
  }
};

// Mean over columns j of lambda(sigma_j) ||D(x_j, sigma_j) - x0_j||^2, where
// x_j is the forward state of x0_j at sigma_j with noise eta_j. The
// variance-preserving state is rescaled by sqrt(1 + sigma^2) (i.e. to
// x0 + sigma eta) before denoising, the scale the denoiser and the sampler
// work in.
ad::Var edm_loss_graph(ad::Tape& tape, const DenoiserParams& params, double* grad_sink,
                       const Eigen::MatrixXd& x0, const Eigen::VectorXd& sigmas,
                       const Eigen::MatrixXd& eta, const std::vector<int>& labels);

// Draws sigma from cfg.sigma_law and eta ~ N(0, I), then builds the loss of
// a single example.
ad::Var edm_loss(ad::Tape& tape, const DenoiserParams& params, double* grad_sink, const Tensor& x0,
                 const EdmLossConfig& cfg, Rng& rng, int label = -1, SigmaLog* log = nullptr);

// Loss value only.
double edm_loss_value(const DenoiserParams& params, const Tensor& x0, const EdmLossConfig& cfg,
                      Rng& rng, int label = -1, SigmaLog* log = nullptr);

}  // namespace dpsyn

#endif  // DPSYN_EDM_LOSS_HPP_

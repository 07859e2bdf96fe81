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

#ifndef DPSYN_GRADIENT_HPP_
#define DPSYN_GRADIENT_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/autodiff.hpp"

namespace dpsyn {

// Flat parameter-aligned gradient with a cached Euclidean norm.
class GradientVector {
 public:
  GradientVector() = default;
  explicit GradientVector(Eigen::VectorXd values)
      : values_(std::move(values)), norm_(values_.norm()) {}

  static GradientVector zeros(Eigen::Index n) { return GradientVector(Eigen::VectorXd::Zero(n)); }

  const Eigen::VectorXd& values() const { return values_; }
  double norm() const { return norm_; }
  Eigen::Index size() const { return values_.size(); }

  // Rescales in place, keeping the cached norm consistent.
  void scale(double factor) {
    values_ *= factor;
    norm_ = values_.norm();
  }

 private:
  Eigen::VectorXd values_;
  double norm_ = 0.0;
};

// Builds the scalar loss of one example on a fresh tape; parameter leaves
// must accumulate into `grad_sink`, a buffer aligned with the flat
// parameter vector.
using ExampleLoss = std::function<ad::Var(ad::Tape& tape, double* grad_sink, std::size_t index)>;

struct LossAndGradient {
  double loss = 0.0;
  GradientVector gradient;
};

// Gradient of a single scalar loss.
LossAndGradient value_and_gradient(Eigen::Index parameter_count,
                                   const std::function<ad::Var(ad::Tape&, double*)>& loss);

// One forward/backward pass per example. Throws NumericalError naming the
// first example whose loss is not finite.
std::vector<GradientVector> per_sample_gradients(Eigen::Index parameter_count,
                                                 const ExampleLoss& loss, std::size_t batch_size,
                                                 std::vector<double>* losses = nullptr);

}  // namespace dpsyn

#endif  // DPSYN_GRADIENT_HPP_

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

#ifndef DPSYN_MLP_HPP_
#define DPSYN_MLP_HPP_

#include <vector>

#include <Eigen/Core>

#include "dpsyn/autodiff.hpp"
#include "dpsyn/rng.hpp"

namespace dpsyn {

enum class Activation { kSilu, kTanh };

// Fully connected layer stack laid out over one flat parameter vector. Each
// layer stores its (out x in) weight column-major followed by its bias.
class MlpLayout {
 public:
  struct Layer {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index weight_offset = 0;
    Eigen::Index bias_offset = 0;
  };

  MlpLayout() = default;
  // widths = {input, hidden..., output}; at least two entries.
  explicit MlpLayout(std::vector<Eigen::Index> widths);

  const std::vector<Eigen::Index>& widths() const { return widths_; }
  const std::vector<Layer>& layers() const { return layers_; }
  Eigen::Index input_width() const { return widths_.front(); }
  Eigen::Index output_width() const { return widths_.back(); }
  Eigen::Index parameter_count() const { return parameter_count_; }

 private:
  std::vector<Eigen::Index> widths_;
  std::vector<Layer> layers_;
  Eigen::Index parameter_count_ = 0;
};

// LeCun-normal weights, zero biases. A zero output layer makes a freshly
// initialised network contribute nothing.
Eigen::VectorXd mlp_init(const MlpLayout& layout, Rng& rng, bool zero_output_layer);

// Evaluates the network on the columns of `input`. Hidden layers use
// `activation`; the output layer is linear. Pass grad_sink = nullptr for a
// forward-only graph.
ad::Var mlp_forward(ad::Tape& tape, const MlpLayout& layout, const Eigen::VectorXd& params,
                    double* grad_sink, ad::Var input, Activation activation);

}  // namespace dpsyn

#endif  // DPSYN_MLP_HPP_

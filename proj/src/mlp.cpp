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

#include "dpsyn/mlp.hpp"

#include <cmath>
#include <string>

#include "dpsyn/error.hpp"

namespace dpsyn {

MlpLayout::MlpLayout(std::vector<Eigen::Index> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw InvalidArgument("MlpLayout: need input and output widths");
  for (Eigen::Index w : widths_)
    if (w <= 0) throw InvalidArgument("MlpLayout: widths must be positive");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    Layer layer;
    layer.rows = widths_[l + 1];
    layer.cols = widths_[l];
    layer.weight_offset = offset;
    offset += layer.rows * layer.cols;
    layer.bias_offset = offset;
    offset += layer.rows;
    layers_.push_back(layer);
  }
  parameter_count_ = offset;
}

Eigen::VectorXd mlp_init(const MlpLayout& layout, Rng& rng, bool zero_output_layer) {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(layout.parameter_count());
  const auto& layers = layout.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (zero_output_layer && l + 1 == layers.size()) break;
    const auto& layer = layers[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.cols));
    for (Eigen::Index i = 0; i < layer.rows * layer.cols; ++i)
      params[layer.weight_offset + i] = scale * rng.normal();
  }
  return params;
}

ad::Var mlp_forward(ad::Tape& tape, const MlpLayout& layout, const Eigen::VectorXd& params,
                    double* grad_sink, ad::Var input, Activation activation) {
  if (params.size() != layout.parameter_count())
    throw InvalidArgument("mlp_forward: expected " + std::to_string(layout.parameter_count()) +
                          " parameters, got " + std::to_string(params.size()));
  if (tape.value(input).rows() != layout.input_width())
    throw InvalidArgument("mlp_forward: input width " +
                          std::to_string(tape.value(input).rows()) + " != " +
                          std::to_string(layout.input_width()));
  ad::Var h = input;
  const auto& layers = layout.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const ad::Var w = tape.parameter(params.data() + layer.weight_offset, layer.rows, layer.cols,
                                     grad_sink ? grad_sink + layer.weight_offset : nullptr);
    const ad::Var b = tape.parameter(params.data() + layer.bias_offset, layer.rows, 1,
                                     grad_sink ? grad_sink + layer.bias_offset : nullptr);
    h = tape.add_bias(tape.matmul(w, h), b);
    if (l + 1 < layers.size())
      h = activation == Activation::kSilu ? tape.silu(h) : tape.tanh(h);
  }
  return h;
}

}  // namespace dpsyn

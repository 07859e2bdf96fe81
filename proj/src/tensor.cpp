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

#include "dpsyn/tensor.hpp"

namespace dpsyn {

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Eigen::MatrixXd stack_columns(const std::vector<Tensor>& tensors) {
  if (tensors.empty()) return {};
  const Index rows = tensors.front().size();
  Eigen::MatrixXd out(rows, static_cast<Index>(tensors.size()));
  for (std::size_t j = 0; j < tensors.size(); ++j) {
    if (tensors[j].size() != rows)
      throw InvalidArgument("stack_columns: tensor " + std::to_string(j) + " has shape " +
                            shape_string(tensors[j].shape()));
    out.col(static_cast<Index>(j)) = tensors[j].data();
  }
  return out;
}

std::vector<Tensor> unstack_columns(const Eigen::MatrixXd& columns, const Shape& shape) {
  if (columns.rows() != shape_size(shape))
    throw InvalidArgument("unstack_columns: row count does not match shape " + shape_string(shape));
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(columns.cols()));
  for (Index j = 0; j < columns.cols(); ++j) out.emplace_back(shape, columns.col(j));
  return out;
}

}  // namespace dpsyn

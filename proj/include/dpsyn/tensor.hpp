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

#ifndef DPSYN_TENSOR_HPP_
#define DPSYN_TENSOR_HPP_

#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/error.hpp"

namespace dpsyn {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape);

// Dense row-major tensor of arbitrary rank backed by a contiguous Eigen
// vector. Images are rank 3, (channels, height, width).
template <typename Scalar>
class BasicTensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape)
      : shape_(std::move(shape)), data_(Vector::Zero(shape_size(shape_))) {}

  BasicTensor(Shape shape, Vector data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != data_.size())
      throw InvalidArgument("tensor shape " + shape_string(shape_) + " does not match " +
                            std::to_string(data_.size()) + " values");
  }

  static BasicTensor constant(Shape shape, Scalar value) {
    BasicTensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return data_.size(); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  // Rank-3 accessors.
  Scalar& operator()(Index c, Index h, Index w) { return data_[offset(c, h, w)]; }
  Scalar operator()(Index c, Index h, Index w) const { return data_[offset(c, h, w)]; }

  bool all_finite() const { return data_.allFinite(); }

  bool operator==(const BasicTensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Index offset(Index c, Index h, Index w) const {
    return (c * shape_[1] + h) * shape_[2] + w;
  }

  Shape shape_;
  Vector data_;
};

using Tensor = BasicTensor<double>;

inline Shape image_shape(Index channels, Index height, Index width) {
  return {channels, height, width};
}

// Packs equally-shaped tensors as the columns of a matrix.
Eigen::MatrixXd stack_columns(const std::vector<Tensor>& tensors);

// Inverse of stack_columns.
std::vector<Tensor> unstack_columns(const Eigen::MatrixXd& columns, const Shape& shape);

}  // namespace dpsyn

#endif  // DPSYN_TENSOR_HPP_

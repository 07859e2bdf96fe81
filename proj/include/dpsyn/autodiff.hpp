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

#ifndef DPSYN_AUTODIFF_HPP_
#define DPSYN_AUTODIFF_HPP_

#include <initializer_list>
#include <vector>

#include <Eigen/Core>

namespace dpsyn::ad {

using Matrix = Eigen::MatrixXd;
using ConstMap = Eigen::Map<const Matrix>;

// Handle to a node on a Tape.
struct Var {
  int id = -1;
};

// Reverse-mode automatic differentiation over matrix-valued nodes.
//
// Nodes are appended in evaluation order, so the tape is already a
// topological order and backward() is a single reverse sweep. Columns are
// treated as independent samples by the batched ops (add_bias, scale_columns,
// weighted_column_sq_norms, softmax_cross_entropy).
//
// Parameter leaves view external storage and accumulate their gradient into
// an external buffer, which lets a flat parameter vector be differentiated
// without copies.
class Tape {
 public:
  Var constant(Matrix value);
  // Leaf whose gradient is retained and readable through grad().
  Var input(Matrix value);
  Var parameter(const double* data, Eigen::Index rows, Eigen::Index cols, double* grad_sink);

  Var matmul(Var a, Var b);
  Var add_bias(Var x, Var bias);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cwise_product(Var a, Var b);
  Var scale(Var x, double factor);
  Var scale_columns(Var x, const Eigen::VectorXd& factors);
  Var silu(Var x);
  Var tanh(Var x);
  Var concat_rows(std::initializer_list<Var> parts);
  Var concat_rows(const std::vector<Var>& parts);
  // Scalar sum_j w_j * ||x_j||^2 over columns x_j.
  Var weighted_column_sq_norms(Var x, const Eigen::VectorXd& weights);
  // Mean softmax cross-entropy over columns of logits.
  Var softmax_cross_entropy(Var logits, std::vector<int> labels);
  Var sum(Var x);

  ConstMap value(Var v) const;
  double scalar(Var v) const;
  const Matrix& grad(Var v) const;

  // Seeds d(output)/d(output) = 1 for a 1x1 output and sweeps the tape.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kConstant, kInput, kParameter, kMatmul, kAddBias, kAdd, kSub, kCwiseProduct,
    kScale, kScaleColumns, kSilu, kTanh, kConcatRows, kWeightedSqNorms,
    kSoftmaxCrossEntropy, kSum
  };

  struct Node {
    Op op = Op::kConstant;
    int a = -1;
    int b = -1;
    std::vector<int> parts;
    Matrix owned;
    const double* external = nullptr;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    double* grad_sink = nullptr;
    Matrix grad;
    Eigen::VectorXd aux;
    std::vector<int> labels;
    double factor = 0.0;
    bool needs_grad = false;
  };

  Var push(Node node);
  Node& node(Var v);
  const Node& node(Var v) const;
  ConstMap view(const Node& n) const;
  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& delta);

  std::vector<Node> nodes_;
};

}  // namespace dpsyn::ad

#endif  // DPSYN_AUTODIFF_HPP_

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

#include "dpsyn/autodiff.hpp"

#include <cmath>
#include <string>

#include "dpsyn/error.hpp"

namespace dpsyn::ad {
namespace {

Eigen::ArrayXXd logistic(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

void require_same_shape(const ConstMap& a, const ConstMap& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()));
}

}  // namespace

Var Tape::push(Node n) {
  if (n.external == nullptr) {
    n.rows = n.owned.rows();
    n.cols = n.owned.cols();
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) { return nodes_.at(static_cast<std::size_t>(v.id)); }
const Tape::Node& Tape::node(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)); }

ConstMap Tape::view(const Node& n) const {
  return ConstMap(n.external ? n.external : n.owned.data(), n.rows, n.cols);
}

ConstMap Tape::value(Var v) const { return view(node(v)); }

double Tape::scalar(Var v) const {
  const Node& n = node(v);
  if (n.rows != 1 || n.cols != 1) throw InvalidArgument("scalar(): node is not 1x1");
  return view(n)(0, 0);
}

const Matrix& Tape::grad(Var v) const { return node(v).grad; }

Var Tape::constant(Matrix value) {
  Node n;
  n.op = Op::kConstant;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::input(Matrix value) {
  Node n;
  n.op = Op::kInput;
  n.owned = std::move(value);
  n.needs_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(const double* data, Eigen::Index rows, Eigen::Index cols, double* grad_sink) {
  Node n;
  n.op = Op::kParameter;
  n.external = data;
  n.rows = rows;
  n.cols = cols;
  n.grad_sink = grad_sink;
  n.needs_grad = grad_sink != nullptr;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const ConstMap va = value(a);
  const ConstMap vb = value(b);
  if (va.cols() != vb.rows())
    throw InvalidArgument("matmul: inner dimensions " + std::to_string(va.cols()) + " and " +
                          std::to_string(vb.rows()) + " differ");
  Node n;
  n.op = Op::kMatmul;
  n.a = a.id;
  n.b = b.id;
  n.owned.noalias() = va * vb;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::add_bias(Var x, Var bias) {
  const ConstMap vx = value(x);
  const ConstMap vb = value(bias);
  if (vb.cols() != 1 || vb.rows() != vx.rows())
    throw InvalidArgument("add_bias: bias must be a column matching the row count");
  Node n;
  n.op = Op::kAddBias;
  n.a = x.id;
  n.b = bias.id;
  n.owned = vx.colwise() + vb.col(0);
  n.needs_grad = node(x).needs_grad || node(bias).needs_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.owned = value(a) + value(b);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.owned = value(a) - value(b);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::cwise_product(Var a, Var b) {
  require_same_shape(value(a), value(b), "cwise_product");
  Node n;
  n.op = Op::kCwiseProduct;
  n.a = a.id;
  n.b = b.id;
  n.owned = value(a).cwiseProduct(value(b));
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
  Node n;
  n.op = Op::kScale;
  n.a = x.id;
  n.factor = factor;
  n.owned = factor * value(x);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::scale_columns(Var x, const Eigen::VectorXd& factors) {
  const ConstMap vx = value(x);
  if (factors.size() != vx.cols())
    throw InvalidArgument("scale_columns: need one factor per column");
  Node n;
  n.op = Op::kScaleColumns;
  n.a = x.id;
  n.aux = factors;
  n.owned = vx * factors.asDiagonal();
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::silu(Var x) {
  Node n;
  n.op = Op::kSilu;
  n.a = x.id;
  const Eigen::ArrayXXd vx = value(x).array();
  n.owned = (vx * logistic(vx)).matrix();
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var x) {
  Node n;
  n.op = Op::kTanh;
  n.a = x.id;
  n.owned = value(x).array().tanh().matrix();
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::vector<Var>(parts));
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no parts");
  const Eigen::Index cols = value(parts.front()).cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    if (value(p).cols() != cols) throw InvalidArgument("concat_rows: column counts differ");
    rows += value(p).rows();
  }
  Node n;
  n.op = Op::kConcatRows;
  n.owned.resize(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    const ConstMap vp = value(p);
    n.owned.middleRows(offset, vp.rows()) = vp;
    offset += vp.rows();
    n.parts.push_back(p.id);
    n.needs_grad = n.needs_grad || node(p).needs_grad;
  }
  return push(std::move(n));
}

Var Tape::weighted_column_sq_norms(Var x, const Eigen::VectorXd& weights) {
  const ConstMap vx = value(x);
  if (weights.size() != vx.cols())
    throw InvalidArgument("weighted_column_sq_norms: need one weight per column");
  Node n;
  n.op = Op::kWeightedSqNorms;
  n.a = x.id;
  n.aux = weights;
  n.owned.resize(1, 1);
  n.owned(0, 0) = vx.colwise().squaredNorm().dot(weights);
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::vector<int> labels) {
  const ConstMap z = value(logits);
  if (static_cast<Eigen::Index>(labels.size()) != z.cols())
    throw InvalidArgument("softmax_cross_entropy: need one label per column");
  double total = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const int label = labels[static_cast<std::size_t>(j)];
    if (label < 0 || label >= z.rows())
      throw InvalidArgument("softmax_cross_entropy: label out of range");
    const double m = z.col(j).maxCoeff();
    const double lse = m + std::log((z.col(j).array() - m).exp().sum());
    total += lse - z(label, j);
  }
  Node n;
  n.op = Op::kSoftmaxCrossEntropy;
  n.a = logits.id;
  n.labels = std::move(labels);
  n.owned.resize(1, 1);
  n.owned(0, 0) = z.cols() > 0 ? total / static_cast<double>(z.cols()) : 0.0;
  n.needs_grad = node(logits).needs_grad;
  return push(std::move(n));
}

Var Tape::sum(Var x) {
  Node n;
  n.op = Op::kSum;
  n.a = x.id;
  n.owned.resize(1, 1);
  n.owned(0, 0) = value(x).sum();
  n.needs_grad = node(x).needs_grad;
  return push(std::move(n));
}

template <typename Derived>
void Tape::accumulate(int id, const Eigen::MatrixBase<Derived>& delta) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = delta;
  } else {
    n.grad += delta;
  }
}

void Tape::backward(Var output) {
  {
    Node& out = node(output);
    if (out.rows != 1 || out.cols != 1) throw InvalidArgument("backward: output must be 1x1");
    for (Node& n : nodes_) n.grad.resize(0, 0);
    out.grad = Matrix::Ones(1, 1);
  }
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Matrix& g = n.grad;
    switch (n.op) {
      case Op::kConstant:
      case Op::kInput:
        break;
      case Op::kParameter:
        Eigen::Map<Matrix>(n.grad_sink, n.rows, n.cols) += g;
        break;
      case Op::kMatmul: {
        const ConstMap va = view(nodes_[n.a]);
        const ConstMap vb = view(nodes_[n.b]);
        if (nodes_[n.a].needs_grad) accumulate(n.a, g * vb.transpose());
        if (nodes_[n.b].needs_grad) accumulate(n.b, va.transpose() * g);
        break;
      }
      case Op::kAddBias:
        accumulate(n.a, g);
        if (nodes_[n.b].needs_grad) accumulate(n.b, g.rowwise().sum());
        break;
      case Op::kAdd:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::kSub:
        accumulate(n.a, g);
        if (nodes_[n.b].needs_grad) accumulate(n.b, -g);
        break;
      case Op::kCwiseProduct: {
        const ConstMap va = view(nodes_[n.a]);
        const ConstMap vb = view(nodes_[n.b]);
        if (nodes_[n.a].needs_grad) accumulate(n.a, g.cwiseProduct(vb));
        if (nodes_[n.b].needs_grad) accumulate(n.b, g.cwiseProduct(va));
        break;
      }
      case Op::kScale:
        accumulate(n.a, n.factor * g);
        break;
      case Op::kScaleColumns:
        accumulate(n.a, g * n.aux.asDiagonal());
        break;
      case Op::kSilu: {
        const Eigen::ArrayXXd x = view(nodes_[n.a]).array();
        const Eigen::ArrayXXd s = logistic(x);
        accumulate(n.a, (g.array() * s * (1.0 + x * (1.0 - s))).matrix());
        break;
      }
      case Op::kTanh: {
        const Eigen::ArrayXXd y = n.owned.array();
        accumulate(n.a, (g.array() * (1.0 - y * y)).matrix());
        break;
      }
      case Op::kConcatRows: {
        Eigen::Index offset = 0;
        for (int part : n.parts) {
          const Eigen::Index rows = nodes_[part].rows;
          if (nodes_[part].needs_grad) accumulate(part, g.middleRows(offset, rows));
          offset += rows;
        }
        break;
      }
      case Op::kWeightedSqNorms: {
        const ConstMap vx = view(nodes_[n.a]);
        accumulate(n.a, (2.0 * g(0, 0)) * (vx * n.aux.asDiagonal()));
        break;
      }
      case Op::kSoftmaxCrossEntropy: {
        const ConstMap z = view(nodes_[n.a]);
        Matrix delta(z.rows(), z.cols());
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
          const double m = z.col(j).maxCoeff();
          Eigen::VectorXd p = (z.col(j).array() - m).exp().matrix();
          p /= p.sum();
          p[n.labels[static_cast<std::size_t>(j)]] -= 1.0;
          delta.col(j) = p;
        }
        accumulate(n.a, (g(0, 0) / static_cast<double>(z.cols())) * delta);
        break;
      }
      case Op::kSum: {
        const Node& in = nodes_[n.a];
        accumulate(n.a, Matrix::Constant(in.rows, in.cols, g(0, 0)));
        break;
      }
    }
  }
}

}  // namespace dpsyn::ad

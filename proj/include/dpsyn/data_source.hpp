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

#ifndef DPSYN_DATA_SOURCE_HPP_
#define DPSYN_DATA_SOURCE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/tensor.hpp"

namespace dpsyn {

// Image set whose reads are counted, so that a run can prove which phase
// touched which data.
class DataSource {
 public:
  DataSource() = default;
  DataSource(std::string name, const std::vector<Tensor>& images, std::vector<int> labels = {});
  DataSource(std::string name, Shape shape, Eigen::MatrixXd columns, std::vector<int> labels = {});

  const std::string& name() const { return name_; }
  const Shape& shape() const { return shape_; }
  std::size_t size() const { return static_cast<std::size_t>(columns_.cols()); }
  bool empty() const { return size() == 0; }
  bool labelled() const { return !labels_.empty(); }

  // Counted accessors.
  Tensor image(std::size_t i) const;
  // Columns for the given indices, counting one read per index.
  Eigen::MatrixXd gather(const std::vector<std::size_t>& indices) const;
  int label(std::size_t i) const { return labels_.empty() ? -1 : labels_.at(i); }

  // Uncounted view for evaluation code that is not part of training.
  const Eigen::MatrixXd& columns() const { return columns_; }
  const std::vector<int>& labels() const { return labels_; }

  std::size_t reads() const { return reads_; }
  void reset_reads() { reads_ = 0; }

 private:
  std::string name_;
  Shape shape_;
  Eigen::MatrixXd columns_;
  std::vector<int> labels_;
  mutable std::size_t reads_ = 0;
};

}  // namespace dpsyn

#endif  // DPSYN_DATA_SOURCE_HPP_

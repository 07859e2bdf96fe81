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

#include "dpsyn/data_source.hpp"

#include <stdexcept>

#include "dpsyn/error.hpp"

namespace dpsyn {

DataSource::DataSource(std::string name, const std::vector<Tensor>& images, std::vector<int> labels)
    : DataSource(std::move(name), images.empty() ? Shape{} : images.front().shape(),
                 images.empty() ? Eigen::MatrixXd() : stack_columns(images), std::move(labels)) {}

DataSource::DataSource(std::string name, Shape shape, Eigen::MatrixXd columns, std::vector<int> labels)
    : name_(std::move(name)), shape_(std::move(shape)), columns_(std::move(columns)), labels_(std::move(labels)) {
  if (columns_.cols() > 0 && columns_.rows() != shape_size(shape_))
    throw InvalidArgument("DataSource " + name_ + ": column length differs from image shape");
  if (!labels_.empty() && labels_.size() != size())
    throw InvalidArgument("DataSource " + name_ + ": label count differs from image count");
}

Tensor DataSource::image(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("DataSource " + name_ + ": index out of range");
  ++reads_;
  return Tensor(shape_, columns_.col(static_cast<Index>(i)));
}

Eigen::MatrixXd DataSource::gather(const std::vector<std::size_t>& indices) const {
  Eigen::MatrixXd out(columns_.rows(), static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw std::out_of_range("DataSource " + name_ + ": index out of range");
    out.col(static_cast<Index>(k)) = columns_.col(static_cast<Index>(indices[k]));
  }
  reads_ += indices.size();
  return out;
}

}  // namespace dpsyn

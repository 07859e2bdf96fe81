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

#ifndef DPSYN_IO_HPP_
#define DPSYN_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dpsyn/tensor.hpp"
#include "dpsyn/toy_data.hpp"

namespace dpsyn {

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

// IDX image and label files (unsigned bytes, big-endian header). Pixels are
// scaled by 1/255 into 1 x rows x cols tensors.
LabelledImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
std::vector<Tensor> read_idx_images(std::istream& in);
std::vector<int> read_idx_labels(std::istream& in);

// Quantises pixels to round(255 x) clamped to [0, 255].
void write_idx_images(std::ostream& out, const std::vector<Tensor>& images);
void write_idx_labels(std::ostream& out, const std::vector<int>& labels);

// Binary 8-bit PGM (P5) of a single-channel image, same quantisation.
void write_pgm(std::ostream& out, const Tensor& image);
void write_pgm(const std::filesystem::path& path, const Tensor& image);
Tensor read_pgm(std::istream& in);

// Raw tensor container: "DPSYNTSR", version, rank and dims as little-endian
// u64, then the values as little-endian f64.
inline constexpr std::uint64_t kTensorContainerVersion = 1;
void write_tensor(std::ostream& out, const Tensor& tensor);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(std::istream& in);
Tensor read_tensor(const std::filesystem::path& path);

// A batch of equally shaped images as one tensor with a leading batch axis.
Tensor batch_tensor(const std::vector<Tensor>& images);
std::vector<Tensor> split_batch(const Tensor& batch);

}  // namespace dpsyn

#endif  // DPSYN_IO_HPP_

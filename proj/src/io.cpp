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

#include "dpsyn/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "dpsyn/binary_io.hpp"
#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

constexpr char kTensorMagic[9] = "DPSYNTSR";

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  return out;
}

unsigned char quantise(double v) {
  return static_cast<unsigned char>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

void check_magic(std::uint32_t got, std::uint32_t want, const char* what) {
  if (got != want)
    throw FormatError(FormatError::Kind::kBadMagic, std::string("IDX ") + what + ": magic " +
                                                        std::to_string(got) + ", expected " + std::to_string(want));
}

void read_bytes(std::istream& in, unsigned char* data, std::size_t n, const char* what) {
  if (!in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n)))
    throw FormatError(FormatError::Kind::kTruncated, std::string("IDX ") + what + ": truncated payload");
}

}  // namespace

std::vector<Tensor> read_idx_images(std::istream& in) {
  check_magic(binary::read_be32(in, "IDX image magic"), kIdxImageMagic, "images");
  const std::uint32_t count = binary::read_be32(in, "IDX image count");
  const std::uint32_t rows = binary::read_be32(in, "IDX rows");
  const std::uint32_t cols = binary::read_be32(in, "IDX cols");
  if (rows == 0 || cols == 0) throw FormatError(FormatError::Kind::kCountMismatch, "IDX images: zero-sized image");
  const std::size_t pixels = std::size_t{rows} * cols;
  std::vector<unsigned char> buffer(pixels);
  std::vector<Tensor> images;
  images.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    read_bytes(in, buffer.data(), pixels, "images");
    Tensor img(image_shape(1, rows, cols));
    for (std::size_t p = 0; p < pixels; ++p) img.data()[static_cast<Index>(p)] = buffer[p] / 255.0;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<int> read_idx_labels(std::istream& in) {
  check_magic(binary::read_be32(in, "IDX label magic"), kIdxLabelMagic, "labels");
  const std::uint32_t count = binary::read_be32(in, "IDX label count");
  std::vector<unsigned char> buffer(count);
  read_bytes(in, buffer.data(), count, "labels");
  return std::vector<int>(buffer.begin(), buffer.end());
}

LabelledImages load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  std::ifstream image_in = open_in(images);
  std::ifstream label_in = open_in(labels);
  LabelledImages out;
  out.images = read_idx_images(image_in);
  out.labels = read_idx_labels(label_in);
  if (out.images.size() != out.labels.size())
    throw FormatError(FormatError::Kind::kCountMismatch,
                      "IDX: " + std::to_string(out.images.size()) + " images but " +
                          std::to_string(out.labels.size()) + " labels");
  return out;
}

void write_idx_images(std::ostream& out, const std::vector<Tensor>& images) {
  const Index rows = images.empty() ? 0 : images.front().shape()[1];
  const Index cols = images.empty() ? 0 : images.front().shape()[2];
  binary::write_be32(out, kIdxImageMagic);
  binary::write_be32(out, static_cast<std::uint32_t>(images.size()));
  binary::write_be32(out, static_cast<std::uint32_t>(rows));
  binary::write_be32(out, static_cast<std::uint32_t>(cols));
  for (const auto& img : images) {
    if (img.shape() != image_shape(1, rows, cols)) throw InvalidArgument("write_idx_images: mixed shapes");
    for (Index p = 0; p < img.size(); ++p) out.put(static_cast<char>(quantise(img.data()[p])));
  }
}

void write_idx_labels(std::ostream& out, const std::vector<int>& labels) {
  binary::write_be32(out, kIdxLabelMagic);
  binary::write_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw InvalidArgument("write_idx_labels: label outside a byte");
    out.put(static_cast<char>(l));
  }
}

void write_pgm(std::ostream& out, const Tensor& image) {
  if (image.rank() != 3 || image.shape()[0] != 1) throw InvalidArgument("write_pgm: need a 1 x H x W image");
  out << "P5\n" << image.shape()[2] << ' ' << image.shape()[1] << "\n255\n";
  for (Index p = 0; p < image.size(); ++p) out.put(static_cast<char>(quantise(image.data()[p])));
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  std::ofstream out = open_out(path);
  write_pgm(out, image);
}

Tensor read_pgm(std::istream& in) {
  std::string magic;
  long width = 0, height = 0, maxval = 0;
  if (!(in >> magic >> width >> height >> maxval) || magic != "P5")
    throw FormatError(FormatError::Kind::kBadMagic, "PGM: not a binary P5 file");
  if (maxval != 255 || width <= 0 || height <= 0)
    throw FormatError(FormatError::Kind::kUnsupportedVersion, "PGM: only 8-bit images are supported");
  in.get();
  Tensor img(image_shape(1, height, width));
  std::vector<unsigned char> buffer(static_cast<std::size_t>(width * height));
  if (!in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size())))
    throw FormatError(FormatError::Kind::kTruncated, "PGM: truncated pixel data");
  for (std::size_t p = 0; p < buffer.size(); ++p) img.data()[static_cast<Index>(p)] = buffer[p] / 255.0;
  return img;
}

void write_tensor(std::ostream& out, const Tensor& tensor) {
  out.write(kTensorMagic, 8);
  binary::write_u64(out, kTensorContainerVersion);
  binary::write_u64(out, tensor.shape().size());
  for (Index d : tensor.shape()) binary::write_u64(out, static_cast<std::uint64_t>(d));
  for (Index i = 0; i < tensor.size(); ++i) binary::write_f64(out, tensor.data()[i]);
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out = open_out(path);
  write_tensor(out, tensor);
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed for " + path.string());
}

Tensor read_tensor(std::istream& in) {
  binary::expect_magic(in, kTensorMagic, "tensor container");
  const std::uint64_t version = binary::read_u64(in, "tensor version");
  if (version != kTensorContainerVersion)
    throw FormatError(FormatError::Kind::kUnsupportedVersion,
                      "tensor container: unsupported version " + std::to_string(version));
  const std::uint64_t rank = binary::read_u64(in, "tensor rank");
  if (rank > 16) throw FormatError(FormatError::Kind::kUnsupportedVersion, "tensor container: implausible rank");
  Shape shape;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const std::uint64_t d = binary::read_u64(in, "tensor dims");
    if (d > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))
      throw FormatError(FormatError::Kind::kUnsupportedVersion, "tensor container: implausible dimension");
    shape.push_back(static_cast<Index>(d));
  }
  Tensor t(shape);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = binary::read_f64(in, "tensor values");
  return t;
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_tensor(in);
}

Tensor batch_tensor(const std::vector<Tensor>& images) {
  if (images.empty()) return Tensor(Shape{0});
  Shape shape = {static_cast<Index>(images.size())};
  for (Index d : images.front().shape()) shape.push_back(d);
  return Tensor(shape, stack_columns(images).reshaped());
}

std::vector<Tensor> split_batch(const Tensor& batch) {
  if (batch.rank() < 1) throw InvalidArgument("split_batch: need a leading batch axis");
  const Shape item(batch.shape().begin() + 1, batch.shape().end());
  const Index n = batch.shape()[0];
  if (n == 0) return {};
  return unstack_columns(batch.data().reshaped(shape_size(item), n), item);
}

}  // namespace dpsyn

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

#include "dpsyn/toy_data.hpp"

#include <algorithm>
#include <array>

#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

// Segment bits: a (top), b (upper right), c (lower right), d (bottom),
// e (lower left), f (upper left), g (middle).
enum Segment : unsigned { kA = 1, kB = 2, kC = 4, kD = 8, kE = 16, kF = 32, kG = 64 };

constexpr std::array<unsigned, kToyDigitClasses> kGlyphs = {
    kA | kB | kC | kD | kE | kF,       // 0
    kB | kC,                           // 1
    kA | kB | kG | kE | kD,            // 2
    kA | kB | kG | kC | kD,            // 3
    kF | kG | kB | kC,                 // 4
    kA | kF | kG | kC | kD,            // 5
    kA | kF | kG | kE | kD | kC,       // 6
    kA | kB | kC,                      // 7
};

void fill(Tensor& img, Index r0, Index r1, Index c0, Index c1, double value) {
  const Index h = img.shape()[1];
  const Index w = img.shape()[2];
  for (Index r = std::max<Index>(r0, 0); r <= std::min(r1, h - 1); ++r)
    for (Index c = std::max<Index>(c0, 0); c <= std::min(c1, w - 1); ++c) img(0, r, c) = value;
}

}  // namespace

void ToyDigitsParams::validate() const {
  if (height < 12 || width < 10) throw InvalidArgument("toy digits: image must be at least 12x10");
  if (max_shift < 0) throw InvalidArgument("toy digits: negative shift");
}

Tensor toy_digit(int label, const ToyDigitsParams& params, Rng& rng) {
  params.validate();
  if (label < 0 || label >= kToyDigitClasses) throw InvalidArgument("toy digits: label out of range");
  Tensor img = Tensor::constant(image_shape(1, params.height, params.width), 0.0);
  const auto shift = [&] {
    return static_cast<Index>(rng.below(2 * static_cast<std::uint64_t>(params.max_shift) + 1)) - params.max_shift;
  };
  const Index glyph_h = params.height - 6 + static_cast<Index>(rng.below(3));
  const Index glyph_w = params.width / 2 - 1 + static_cast<Index>(rng.below(3));
  const Index stroke = 2;
  const double value = rng.uniform(0.9, 1.0);
  const Index top = (params.height - glyph_h) / 2 + shift();
  const Index left = (params.width - glyph_w) / 2 + shift();
  const Index bottom = top + glyph_h - 1;
  const Index right = left + glyph_w - 1;
  const Index mid = top + glyph_h / 2;
  const unsigned glyph = kGlyphs[static_cast<std::size_t>(label)];
  if (glyph & kA) fill(img, top, top + stroke - 1, left, right, value);
  if (glyph & kD) fill(img, bottom - stroke + 1, bottom, left, right, value);
  if (glyph & kG) fill(img, mid - stroke / 2, mid - stroke / 2 + stroke - 1, left, right, value);
  if (glyph & kF) fill(img, top, mid, left, left + stroke - 1, value);
  if (glyph & kE) fill(img, mid, bottom, left, left + stroke - 1, value);
  if (glyph & kB) fill(img, top, mid, right - stroke + 1, right, value);
  if (glyph & kC) fill(img, mid, bottom, right - stroke + 1, right, value);
  return img;
}

LabelledImages make_toy_digits(std::size_t n, std::uint64_t seed, const ToyDigitsParams& params) {
  params.validate();
  Rng rng = Rng::stream(seed, kToyDigitsName);
  LabelledImages out;
  out.images.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(rng.below(kToyDigitClasses));
    out.labels.push_back(label);
    out.images.push_back(toy_digit(label, params, rng));
  }
  return out;
}

}  // namespace dpsyn

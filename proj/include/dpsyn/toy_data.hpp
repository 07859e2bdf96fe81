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

#ifndef DPSYN_TOY_DATA_HPP_
#define DPSYN_TOY_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dpsyn/rng.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

struct LabelledImages {
  std::vector<Tensor> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
};

// Seven-segment style glyphs of the classes 0..7 drawn as bright bars on a
// dark background, with random shift, glyph size, stroke width and
// intensity.
struct ToyDigitsParams {
  Index height = 16;
  Index width = 16;
  int max_shift = 2;

  void validate() const;
};

inline constexpr int kToyDigitClasses = 8;
inline constexpr const char* kToyDigitsName = "toy-digits";

Tensor toy_digit(int label, const ToyDigitsParams& params, Rng& rng);

// n images with uniformly random labels.
LabelledImages make_toy_digits(std::size_t n, std::uint64_t seed, const ToyDigitsParams& params = {});

}  // namespace dpsyn

#endif  // DPSYN_TOY_DATA_HPP_

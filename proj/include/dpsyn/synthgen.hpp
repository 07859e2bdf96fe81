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

#ifndef DPSYN_SYNTHGEN_HPP_
#define DPSYN_SYNTHGEN_HPP_

#include <cstdint>
#include <vector>

#include "dpsyn/rng.hpp"
#include "dpsyn/tensor.hpp"

namespace dpsyn {

// Grayscale dead-leaves images: opaque disks with power-law radii
// p(r) ~ r^-exponent on [min_radius, max_radius], colour 0, 1 or
// Uniform[0, 1] with probability 1/3 each. Disks are laid front to back; a
// disk only paints pixels no earlier disk covers.
struct DeadLeavesParams {
  Index height = 16;
  Index width = 16;
  // Keep stamping until every pixel is covered.
  bool full_coverage = true;
  // Maximum disk count; 0 means no budget (requires full_coverage).
  Index max_disks = 0;
  double radius_exponent = 3.0;
  double min_radius = 2.0;
  // 0 selects min(height, width) / 2.
  double max_radius = 0.0;
  // Value of pixels no disk covers.
  double background = 0.5;

  void validate() const;
  double effective_max_radius() const;
};

struct Disk {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
  double color = 0.0;

  // Pixel centres lie at (col + 0.5, row + 0.5).
  bool covers(Index row, Index col) const {
    const double dx = static_cast<double>(col) + 0.5 - center_x;
    const double dy = static_cast<double>(row) + 0.5 - center_y;
    return dx * dx + dy * dy <= radius * radius;
  }
};

struct DeadLeavesImage {
  Tensor image;
  // Front-most first.
  std::vector<Disk> disks;
};

DeadLeavesImage dead_leaves_with_disks(const DeadLeavesParams& params, std::uint64_t seed);
Tensor dead_leaves(const DeadLeavesParams& params, std::uint64_t seed);

// The three-way colour mixture.
double dead_leaves_color(Rng& rng);
double power_law_radius(Rng& rng, double exponent, double lo, double hi);

struct SaltPepperParams {
  Index height = 16;
  Index width = 16;
  // Probability of a white pixel; 0.13 is the MNIST mean intensity.
  double p = 0.13;

  void validate() const;
};

Tensor salt_pepper(const SaltPepperParams& params, std::uint64_t seed);

// I.i.d. uniform labels in [0, num_classes).
std::vector<int> random_labels(std::size_t n, int num_classes, std::uint64_t seed);

}  // namespace dpsyn

#endif  // DPSYN_SYNTHGEN_HPP_

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

#include "dpsyn/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

constexpr Index kCoverageDiskCap = 1'000'000;

}  // namespace

void DeadLeavesParams::validate() const {
  if (height <= 0 || width <= 0) throw InvalidArgument("dead_leaves: image size must be positive");
  if (!full_coverage && max_disks <= 0)
    throw InvalidArgument("dead_leaves: need full_coverage or a positive disk budget");
  if (max_disks < 0) throw InvalidArgument("dead_leaves: negative disk budget");
  const double hi = effective_max_radius();
  if (!(min_radius > 0.0) || !(hi >= min_radius))
    throw InvalidArgument("dead_leaves: radius bounds must satisfy 0 < min <= max");
  if (hi > static_cast<double>(std::max(height, width)))
    throw InvalidArgument("dead_leaves: max radius exceeds the image scale");
  if (!(radius_exponent > 1.0)) throw InvalidArgument("dead_leaves: radius exponent must exceed 1");
  if (!(background >= 0.0 && background <= 1.0))
    throw InvalidArgument("dead_leaves: background must lie in [0, 1]");
}

double DeadLeavesParams::effective_max_radius() const {
  return max_radius > 0.0 ? max_radius : static_cast<double>(std::min(height, width)) / 2.0;
}

double dead_leaves_color(Rng& rng) {
  switch (rng.below(3)) {
    case 0:
      return 0.0;
    case 1:
      return 1.0;
    default:
      return rng.uniform_open();
  }
}

double power_law_radius(Rng& rng, double exponent, double lo, double hi) {
  if (hi == lo) return lo;
  // Inverse CDF of p(r) ~ r^-exponent on [lo, hi].
  const double k = 1.0 - exponent;
  const double a = std::pow(lo, k);
  const double b = std::pow(hi, k);
  return std::pow(a + rng.uniform_open() * (b - a), 1.0 / k);
}

DeadLeavesImage dead_leaves_with_disks(const DeadLeavesParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng = Rng::stream(seed, "dead-leaves");
  const Index h = params.height;
  const Index w = params.width;
  DeadLeavesImage out{Tensor::constant(image_shape(1, h, w), params.background), {}};
  std::vector<char> covered(static_cast<std::size_t>(h * w), 0);
  Index remaining = h * w;
  const double r_hi = params.effective_max_radius();
  const Index budget = params.max_disks > 0 ? params.max_disks : kCoverageDiskCap;

  while (static_cast<Index>(out.disks.size()) < budget) {
    if (params.full_coverage && remaining == 0) break;
    Disk disk;
    disk.center_x = rng.uniform(0.0, static_cast<double>(w));
    disk.center_y = rng.uniform(0.0, static_cast<double>(h));
    disk.radius = power_law_radius(rng, params.radius_exponent, params.min_radius, r_hi);
    disk.color = dead_leaves_color(rng);
    const Index r0 = std::max<Index>(0, static_cast<Index>(std::floor(disk.center_y - disk.radius)));
    const Index r1 = std::min<Index>(h - 1, static_cast<Index>(std::ceil(disk.center_y + disk.radius)));
    const Index c0 = std::max<Index>(0, static_cast<Index>(std::floor(disk.center_x - disk.radius)));
    const Index c1 = std::min<Index>(w - 1, static_cast<Index>(std::ceil(disk.center_x + disk.radius)));
    for (Index r = r0; r <= r1; ++r) {
      for (Index c = c0; c <= c1; ++c) {
        const auto k = static_cast<std::size_t>(r * w + c);
        if (covered[k] || !disk.covers(r, c)) continue;
        covered[k] = 1;
        --remaining;
        out.image(0, r, c) = disk.color;
      }
    }
    out.disks.push_back(disk);
  }
  if (params.full_coverage && params.max_disks == 0 && remaining > 0)
    throw NumericalError("dead_leaves: coverage not reached within the disk cap");
  return out;
}

Tensor dead_leaves(const DeadLeavesParams& params, std::uint64_t seed) {
  return dead_leaves_with_disks(params, seed).image;
}

void SaltPepperParams::validate() const {
  if (height <= 0 || width <= 0) throw InvalidArgument("salt_pepper: image size must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("salt_pepper: p must lie in [0, 1]");
}

Tensor salt_pepper(const SaltPepperParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng = Rng::stream(seed, "salt-pepper");
  Tensor img(image_shape(1, params.height, params.width));
  for (Index i = 0; i < img.size(); ++i) img[i] = rng.bernoulli(params.p) ? 1.0 : 0.0;
  return img;
}

std::vector<int> random_labels(std::size_t n, int num_classes, std::uint64_t seed) {
  if (num_classes < 1) throw InvalidArgument("random_labels: need at least one class");
  Rng rng = Rng::stream(seed, "random-labels");
  std::vector<int> labels(n);
  for (auto& label : labels) label = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes)));
  return labels;
}

}  // namespace dpsyn

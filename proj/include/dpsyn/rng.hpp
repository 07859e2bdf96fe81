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

#ifndef DPSYN_RNG_HPP_
#define DPSYN_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace dpsyn {

// Seedable random stream. Every stochastic operation takes one explicitly so
// that runs are reproducible and independent components can be reseeded
// without disturbing each other.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Child stream derived from a master seed and a stream name, e.g.
  // Rng::stream(seed, "dp-noise").
  static Rng stream(std::uint64_t master_seed, std::string_view name);

  // Derives a child stream from this one, advancing it by one draw.
  Rng split(std::string_view name);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  double normal() { return normal_(engine_); }

  bool bernoulli(double p) { return uniform_open() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stable 64-bit FNV-1a hash; used for stream names.
std::uint64_t fnv1a(std::string_view text);

}  // namespace dpsyn

#endif  // DPSYN_RNG_HPP_

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

#ifndef DPSYN_CHECKPOINT_HPP_
#define DPSYN_CHECKPOINT_HPP_

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "dpsyn/adam.hpp"
#include "dpsyn/denoiser.hpp"

namespace dpsyn {

// Checkpoint container, all integers and floats little-endian 64-bit:
//
//   "DPSYNCKP"  u64 version (=1)
//   u64 n  + n bytes       JSON DenoiserConfig (shape metadata)
//   u64 n  + n f64         parameter values
//   u64 n  + n f64         Fourier frequencies
//   u64 has_adam
//   [u64 step, f64 lr, f64 beta1, f64 beta2, f64 eps, f64 m[P], f64 v[P]]
struct Checkpoint {
  DenoiserParams params;
  std::optional<AdamState> adam;
};

inline constexpr std::uint64_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params,
                     const AdamState* adam = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const DenoiserConfig& config);
DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);

}  // namespace dpsyn

#endif  // DPSYN_CHECKPOINT_HPP_

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

#include "dpsyn/checkpoint.hpp"

#include <cmath>
#include <fstream>

#include "dpsyn/binary_io.hpp"
#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

constexpr char kMagic[9] = "DPSYNCKP";

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  binary::write_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) binary::write_f64(out, v[i]);
}

Eigen::VectorXd read_vector(std::istream& in, const char* what, std::uint64_t limit) {
  const std::uint64_t n = binary::read_u64(in, what);
  if (n > limit) throw FormatError(FormatError::Kind::kCountMismatch, std::string("implausible size for ") + what);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = binary::read_f64(in, what);
  return v;
}

}  // namespace

nlohmann::json to_json(const DenoiserConfig& c) {
  return {{"channels", c.channels},
          {"height", c.height},
          {"width", c.width},
          {"num_classes", c.num_classes},
          {"hidden", c.hidden},
          {"fourier_features", c.fourier_features},
          {"fourier_scale", c.fourier_scale},
          {"sigma_data", c.sigma_data},
          {"activation", c.activation == Activation::kSilu ? "silu" : "tanh"},
          {"pixel_scale", c.pixel_scale},
          {"pixel_shift", c.pixel_shift}};
}

DenoiserConfig denoiser_config_from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.channels = j.value("channels", c.channels);
  c.height = j.value("height", c.height);
  c.width = j.value("width", c.width);
  c.num_classes = j.value("num_classes", c.num_classes);
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<Index>>();
  c.fourier_features = j.value("fourier_features", c.fourier_features);
  c.fourier_scale = j.value("fourier_scale", c.fourier_scale);
  c.sigma_data = j.value("sigma_data", c.sigma_data);
  c.pixel_scale = j.value("pixel_scale", c.pixel_scale);
  c.pixel_shift = j.value("pixel_shift", c.pixel_shift);
  if (!(c.pixel_scale != 0.0) || !std::isfinite(c.pixel_scale)) throw ConfigError("pixel_scale must be nonzero");
  const std::string act = j.value("activation", std::string("silu"));
  if (act == "silu") {
    c.activation = Activation::kSilu;
  } else if (act == "tanh") {
    c.activation = Activation::kTanh;
  } else {
    throw ConfigError("unknown activation '" + act + "'");
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const DenoiserParams& params,
                     const AdamState* adam) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string() + " for writing");
  out.write(kMagic, 8);
  binary::write_u64(out, kCheckpointVersion);
  const std::string meta = to_json(params.config()).dump();
  binary::write_u64(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  write_vector(out, params.values());
  write_vector(out, params.frequencies());
  binary::write_u64(out, adam ? 1 : 0);
  if (adam) {
    binary::write_u64(out, static_cast<std::uint64_t>(adam->step));
    binary::write_f64(out, adam->learning_rate);
    binary::write_f64(out, adam->beta1);
    binary::write_f64(out, adam->beta2);
    binary::write_f64(out, adam->epsilon);
    for (Eigen::Index i = 0; i < adam->first_moment.size(); ++i)
      binary::write_f64(out, adam->first_moment[i]);
    for (Eigen::Index i = 0; i < adam->second_moment.size(); ++i)
      binary::write_f64(out, adam->second_moment[i]);
  }
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open " + path.string());
  binary::expect_magic(in, kMagic, "checkpoint");
  const std::uint64_t version = binary::read_u64(in, "version");
  if (version != kCheckpointVersion)
    throw FormatError(FormatError::Kind::kUnsupportedVersion,
                      "unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t meta_size = binary::read_u64(in, "metadata size");
  if (meta_size > (1u << 20))
    throw FormatError(FormatError::Kind::kCountMismatch, "implausible metadata size");
  std::string meta(meta_size, '\0');
  if (!in.read(meta.data(), static_cast<std::streamsize>(meta_size)))
    throw FormatError(FormatError::Kind::kTruncated, "truncated checkpoint metadata");
  const DenoiserConfig config = denoiser_config_from_json(nlohmann::json::parse(meta));
  const auto expected = static_cast<std::uint64_t>(config.layout().parameter_count());
  Eigen::VectorXd values = read_vector(in, "parameters", expected);
  if (static_cast<std::uint64_t>(values.size()) != expected)
    throw FormatError(FormatError::Kind::kCountMismatch, "parameter count does not match metadata");
  Eigen::VectorXd freqs = read_vector(in, "frequencies", static_cast<std::uint64_t>(config.fourier_features));
  Checkpoint ckpt{DenoiserParams(config, std::move(values), std::move(freqs)), std::nullopt};
  if (binary::read_u64(in, "adam flag") != 0) {
    AdamState s = AdamState::for_parameters(ckpt.params.parameter_count());
    s.step = static_cast<std::int64_t>(binary::read_u64(in, "adam step"));
    s.learning_rate = binary::read_f64(in, "adam lr");
    s.beta1 = binary::read_f64(in, "adam beta1");
    s.beta2 = binary::read_f64(in, "adam beta2");
    s.epsilon = binary::read_f64(in, "adam epsilon");
    for (Eigen::Index i = 0; i < s.first_moment.size(); ++i)
      s.first_moment[i] = binary::read_f64(in, "adam moments");
    for (Eigen::Index i = 0; i < s.second_moment.size(); ++i)
      s.second_moment[i] = binary::read_f64(in, "adam moments");
    ckpt.adam = std::move(s);
  }
  return ckpt;
}

}  // namespace dpsyn

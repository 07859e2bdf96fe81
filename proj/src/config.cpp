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


#include "dpsyn/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <rapidjson/document.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include "dpsyn/error.hpp"

namespace dpsyn {

using nlohmann::json;

nlohmann::json default_config() {
  return json{
      {"variant", "coarse"},
      {"thresholds", "auto"},
      {"dataset", {{"builtin", "toy-digits"}, {"train_size", 20000}, {"test_size", 2000}}},
      {"image_size", {16, 16}},
      {"dp",
       {{"enabled", true},
        {"epsilon", 1.0},
        {"delta", 1e-5},
        {"clip_norm", 1.0},
        {"lot_size", 1000},
        {"noise_multiplier", nullptr}}},
      {"epochs", {{"pretrain_max", 60}, {"private", 10.0}}},
      {"multiplicity", 16},
      {"seeds", {0}},
      {"output_dir", "out"},
      {"model",
       {{"hidden", {64, 64}},
        {"conditional", false},
        {"learning_rate", 1e-3},
        {"pretrain_learning_rate", 3e-4},
        {"batch_size", 128}}},
      {"synthetic", {{"kind", "dead-leaves"}, {"count", 4000}, {"p", 0.13}}},
      {"sampler", {{"steps", 64}, {"sigma_min", 0.002}, {"sigma_max", 80.0}, {"rho", 7.0}}},
      {"commands",
       {{"gen-synthetic", {{"kind", "salt-pepper"}, {"n", 100}, {"p", 0.13}, {"num_classes", 8}}},
        {"thresholds", {{"curve_out", nullptr}}},
        {"train", {{"checkpoint_every", 0}}},
        {"sample", {{"checkpoint", nullptr}, {"n", 64}}},
        {"stage-switch",
         {{"context_checkpoint", nullptr},
          {"other_checkpoint", nullptr},
          {"n", 64},
          {"band", {0.25, 0.75}}}},
        {"clean-test", {{"checkpoint", nullptr}, {"input", nullptr}, {"tau", -3.0}}},
        {"verify-theorems",
         {{"draws", 20000},
          {"nu", 0.5},
          {"gamma", 0.05},
          {"stride", 10},
          {"thm2_nu", 2.0},
          {"alpha_bars", {0.999, 0.9997, 0.99997}}}},
        {"evaluate",
         {{"samples", nullptr},
          {"sample_labels", nullptr},
          {"method", "samples"},
          {"epsilon", nullptr},
          {"feature_dim", 64},
          {"classifier_epochs", 50}}},
        {"account",
         {{"epsilon", 1.0},
          {"delta", 1e-5},
          {"q", 0.01},
          {"steps", 1000},
          {"noise_multiplier", nullptr},
          {"ledger_out", nullptr}}}}}};
}

nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& overlay) {
  if (!base.is_object() || !overlay.is_object()) return overlay;
  for (const auto& [key, value] : overlay.items()) {
    if (key != "dataset" && base.contains(key) && base[key].is_object() && value.is_object())
      base[key] = merge_config(base[key], value);
    else
      base[key] = value;
  }
  return base;
}

void validate_config(const nlohmann::json& document) {
  static const rapidjson::SchemaDocument* schema = [] {
    rapidjson::Document d;
    const std::string_view text = config_schema();
    d.Parse(text.data(), text.size());
    if (d.HasParseError()) throw std::logic_error("embedded config schema is not valid JSON");
    return new rapidjson::SchemaDocument(d);
  }();

  rapidjson::Document d;
  const std::string text = document.dump();
  d.Parse(text.c_str());
  if (d.HasParseError()) throw ConfigError("config is not valid JSON");
  rapidjson::SchemaValidator validator(*schema);
  if (d.Accept(validator)) return;

  rapidjson::StringBuffer where;
  validator.GetInvalidDocumentPointer().StringifyUriFragment(where);
  rapidjson::StringBuffer rule;
  validator.GetInvalidSchemaPointer().StringifyUriFragment(rule);
  std::string location = where.GetString();
  if (location == "#") location = "# (document root)";
  throw ConfigError("config violates schema at " + location + ": keyword '" +
                    validator.GetInvalidSchemaKeyword() + "' (" + rule.GetString() + ")");
}

const nlohmann::json& ExperimentConfig::command(const std::string& name) const {
  return document.at("commands").at(name);
}

ExperimentConfig parse_config(const nlohmann::json& document) {
  validate_config(document);
  ExperimentConfig c;
  c.document = document;
  c.variant = document.at("variant").get<std::string>();

  const json& th = document.at("thresholds");
  if (th.is_array()) {
    const double tau1 = th[0].get<double>();
    const double tau2 =
        th[1].is_null() ? std::numeric_limits<double>::infinity() : th[1].get<double>();
    if (!(tau1 < tau2)) throw ConfigError("thresholds: tau1 must be below tau2");
    c.thresholds = std::make_pair(tau1, tau2);
  }

  const json& ds = document.at("dataset");
  if (ds.contains("builtin")) {
    c.dataset.builtin = ds.at("builtin").get<std::string>();
    c.dataset.train_size = ds.at("train_size").get<std::size_t>();
    c.dataset.test_size = ds.at("test_size").get<std::size_t>();
  } else {
    c.dataset.train_images = ds.at("train_images").get<std::string>();
    c.dataset.train_labels = ds.at("train_labels").get<std::string>();
    c.dataset.test_images = ds.at("test_images").get<std::string>();
    c.dataset.test_labels = ds.at("test_labels").get<std::string>();
  }
  c.height = document.at("image_size")[0].get<Index>();
  c.width = document.at("image_size")[1].get<Index>();

  const json& dp = document.at("dp");
  c.dp_enabled = dp.at("enabled").get<bool>();
  c.epsilon = dp.at("epsilon").get<double>();
  c.delta = dp.at("delta").get<double>();
  c.clip_norm = dp.at("clip_norm").get<double>();
  c.lot_size = dp.at("lot_size").get<std::size_t>();
  if (!dp.at("noise_multiplier").is_null()) {
    c.noise_multiplier = dp.at("noise_multiplier").get<double>();
    if (!(*c.noise_multiplier > 0.0))
      throw ConfigError("dp.noise_multiplier must be positive or null");
  }

  c.pretrain_max_epochs = document.at("epochs").at("pretrain_max").get<int>();
  c.private_epochs = document.at("epochs").at("private").get<double>();
  c.multiplicity = document.at("multiplicity").get<int>();
  c.seeds = document.at("seeds").get<std::vector<std::uint64_t>>();
  c.output_dir = document.at("output_dir").get<std::string>();

  const json& model = document.at("model");
  c.hidden = model.at("hidden").get<std::vector<Index>>();
  c.conditional = model.at("conditional").get<bool>();
  c.learning_rate = model.at("learning_rate").get<double>();
  c.pretrain_learning_rate = model.at("pretrain_learning_rate").get<double>();
  c.batch_size = model.at("batch_size").get<std::size_t>();

  const json& syn = document.at("synthetic");
  c.synthetic_kind = syn.at("kind").get<std::string>();
  c.synthetic_count = syn.at("count").get<std::size_t>();
  c.synthetic_p = syn.at("p").get<double>();

  const json& grid = document.at("sampler");
  c.sampler.steps = grid.at("steps").get<int>();
  c.sampler.sigma_min = grid.at("sigma_min").get<double>();
  c.sampler.sigma_max = grid.at("sigma_max").get<double>();
  c.sampler.rho = grid.at("rho").get<double>();
  try {
    c.sampler.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("sampler: ") + e.what());
  }

  // Fill in command sections a partial document left out.
  c.document["commands"] = merge_config(default_config()["commands"], document.at("commands"));
  return c;
}

nlohmann::json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open config file " + path.string());
  json overlay;
  try {
    overlay = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!overlay.is_object()) throw ConfigError("config file " + path.string() + " must hold an object");
  return merge_config(default_config(), overlay);
}

}  // namespace dpsyn

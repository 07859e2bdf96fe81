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


#include "dpsyn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpsyn/accountant.hpp"
#include "dpsyn/checkpoint.hpp"
#include "dpsyn/config.hpp"
#include "dpsyn/diffusion.hpp"
#include "dpsyn/error.hpp"
#include "dpsyn/evaluation.hpp"
#include "dpsyn/experiment.hpp"
#include "dpsyn/io.hpp"
#include "dpsyn/sampler.hpp"
#include "dpsyn/stages.hpp"
#include "dpsyn/synthgen.hpp"
#include "dpsyn/theorems.hpp"
#include "dpsyn/trainer.hpp"

namespace dpsyn {

namespace fs = std::filesystem;
using nlohmann::json;

const char* exit_code_name(ExitCode code) {
  switch (code) {
    case ExitCode::kOk:
      return "ok";
    case ExitCode::kFailure:
      return "failure";
    case ExitCode::kUsage:
      return "usage";
    case ExitCode::kConfig:
      return "config";
    case ExitCode::kMissingFile:
      return "missing_file";
    case ExitCode::kNumerical:
      return "numerical";
    case ExitCode::kInfeasible:
      return "infeasible";
    case ExitCode::kFormat:
      return "format";
  }
  return "failure";
}

fs::path resolve_output_dir(const std::string& configured) {
  fs::path dir(configured);
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootVariable); root && *root) dir = fs::path(root) / dir;
  }
  return dir;
}

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FlagKind { kInt, kNumber, kString, kIntPair, kNumberPair, kThresholds, kIntList, kDatasetDir };

struct Flag {
  const char* name;
  const char* pointer;
  FlagKind kind;
  const char* help;
};

struct Switch {
  const char* name;
  const char* pointer;
  bool value;
  const char* help;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<Flag> flags;
  std::vector<Switch> switches;
};

const std::vector<Command>& commands() {
  using K = FlagKind;
  static const std::vector<Command> table = {
      {"gen-synthetic",
       "Write programmatic synthetic images or random labels",
       {{"--kind", "/commands/gen-synthetic/kind", K::kString, "dead-leaves, salt-pepper or random-labels"},
        {"--n", "/commands/gen-synthetic/n", K::kInt, "number of items"},
        {"--p", "/commands/gen-synthetic/p", K::kNumber, "white-pixel probability for salt-pepper"},
        {"--num-classes", "/commands/gen-synthetic/num_classes", K::kInt, "label range for random-labels"},
        {"--size", "/image_size", K::kIntPair, "image height and width"}},
       {}},
      {"thresholds",
       "Print the cleaning and coarse ln-sigma thresholds",
       {{"--curve-out", "/commands/thresholds/curve_out", K::kString, "CSV for the ln_sigma, alpha_bar, snr curve"}},
       {}},
      {"train",
       "Two-phase training: synthetic pretraining, then (DP) private training",
       {{"--variant", "/variant", K::kString, "coarse, cleaning, finetune or baseline"},
        {"--tau", "/thresholds", K::kThresholds, "explicit tau1 tau2 (tau2 may be inf)"},
        {"--epsilon", "/dp/epsilon", K::kNumber, "privacy budget"},
        {"--delta", "/dp/delta", K::kNumber, "privacy slack"},
        {"--clip-norm", "/dp/clip_norm", K::kNumber, "per-example clipping norm"},
        {"--lot-size", "/dp/lot_size", K::kInt, "expected Poisson lot size"},
        {"--noise-multiplier", "/dp/noise_multiplier", K::kNumber, "skip calibration and use this multiplier"},
        {"--private-epochs", "/epochs/private", K::kNumber, "epochs over the private set"},
        {"--pretrain-epochs", "/epochs/pretrain_max", K::kInt, "maximum synthetic pretraining epochs"},
        {"--multiplicity", "/multiplicity", K::kInt, "noise levels averaged per example"},
        {"--hidden", "/model/hidden", K::kIntList, "hidden layer widths"},
        {"--lr", "/model/learning_rate", K::kNumber, "private-phase learning rate"},
        {"--dataset-dir", "/dataset", K::kDatasetDir, "directory with MNIST-named IDX files"},
        {"--train-size", "/dataset/train_size", K::kInt, "builtin training set size"},
        {"--checkpoint-every", "/commands/train/checkpoint_every", K::kInt, "private steps between checkpoints"}},
       {{"--no-dp", "/dp/enabled", false, "train the private phase without DP"},
        {"--conditional", "/model/conditional", true, "condition the model on class labels"}}},
      {"sample",
       "Draw DDIM samples from a checkpoint",
       {{"--checkpoint", "/commands/sample/checkpoint", K::kString, "model checkpoint"},
        {"--n", "/commands/sample/n", K::kInt, "number of samples"},
        {"--steps", "/sampler/steps", K::kInt, "sampler noise levels"}},
       {}},
      {"stage-switch",
       "Sample with one model inside a trajectory band and another outside it",
       {{"--context", "/commands/stage-switch/context_checkpoint", K::kString, "model used inside the band"},
        {"--other", "/commands/stage-switch/other_checkpoint", K::kString, "model used outside the band"},
        {"--n", "/commands/stage-switch/n", K::kInt, "number of samples"},
        {"--band", "/commands/stage-switch/band", K::kNumberPair, "band (lo, hi] as trajectory fractions"},
        {"--steps", "/sampler/steps", K::kInt, "sampler noise levels"}},
       {}},
      {"clean-test",
       "Noise images forward to ln sigma = tau, then denoise them",
       {{"--checkpoint", "/commands/clean-test/checkpoint", K::kString, "model checkpoint"},
        {"--input", "/commands/clean-test/input", K::kString, "tensor file; defaults to the test split"},
        {"--tau", "/commands/clean-test/tau", K::kNumber, "ln sigma to noise to"},
        {"--steps", "/sampler/steps", K::kInt, "sampler noise levels"}},
       {}},
      {"verify-theorems",
       "Monte Carlo checks of the coarse-stage and cleaning-stage bounds",
       {{"--draws", "/commands/verify-theorems/draws", K::kInt, "Monte Carlo draws"},
        {"--nu", "/commands/verify-theorems/nu", K::kNumber, "coarse-stage distance threshold"},
        {"--gamma", "/commands/verify-theorems/gamma", K::kNumber, "coarse-stage exceedance level"},
        {"--stride", "/commands/verify-theorems/stride", K::kInt, "diffusion steps between checks"},
        {"--thm2-nu", "/commands/verify-theorems/thm2_nu", K::kNumber, "cleaning-stage distance threshold"}},
       {}},
      {"evaluate",
       "Frechet feature distance and classification accuracy of generated images",
       {{"--samples", "/commands/evaluate/samples", K::kString, "tensor file of generated images"},
        {"--labels", "/commands/evaluate/sample_labels", K::kString, "IDX labels of the generated images"},
        {"--method", "/commands/evaluate/method", K::kString, "method name for the report"},
        {"--epsilon", "/commands/evaluate/epsilon", K::kNumber, "epsilon recorded in the report"},
        {"--feature-dim", "/commands/evaluate/feature_dim", K::kInt, "principal components kept"},
        {"--classifier-epochs", "/commands/evaluate/classifier_epochs", K::kInt, "CAS training epochs"},
        {"--dataset-dir", "/dataset", K::kDatasetDir, "directory with MNIST-named IDX files"},
        {"--train-size", "/dataset/train_size", K::kInt, "builtin training set size"},
        {"--test-size", "/dataset/test_size", K::kInt, "builtin test set size"}},
       {}},
      {"account",
       "Calibrate or account the subsampled Gaussian mechanism",
       {{"--epsilon", "/commands/account/epsilon", K::kNumber, "target epsilon"},
        {"--delta", "/commands/account/delta", K::kNumber, "privacy slack"},
        {"--q", "/commands/account/q", K::kNumber, "sampling rate"},
        {"--steps", "/commands/account/steps", K::kInt, "number of steps"},
        {"--noise-multiplier", "/commands/account/noise_multiplier", K::kNumber, "account this multiplier instead of calibrating"},
        {"--ledger-out", "/commands/account/ledger_out", K::kString, "per-step ledger CSV"}},
       {}},
  };
  return table;
}

double parse_number(const std::string& flag, const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw UsageError(flag + ": expected a number, got '" + text + "'");
  return value;
}

std::int64_t parse_int(const std::string& flag, const std::string& text) {
  std::int64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw UsageError(flag + ": expected an integer, got '" + text + "'");
  return value;
}

json flag_value(const Flag& flag, const std::vector<std::string>& raw) {
  const std::string name = flag.name;
  switch (flag.kind) {
    case FlagKind::kInt:
      return parse_int(name, raw.at(0));
    case FlagKind::kNumber:
      return parse_number(name, raw.at(0));
    case FlagKind::kString:
      return raw.at(0);
    case FlagKind::kIntPair:
      return json::array({parse_int(name, raw.at(0)), parse_int(name, raw.at(1))});
    case FlagKind::kNumberPair:
      return json::array({parse_number(name, raw.at(0)), parse_number(name, raw.at(1))});
    case FlagKind::kThresholds: {
      const double tau2 = parse_number(name, raw.at(1));
      return json::array({parse_number(name, raw.at(0)), std::isinf(tau2) ? json(nullptr) : json(tau2)});
    }
    case FlagKind::kIntList: {
      json list = json::array();
      for (const auto& v : raw) list.push_back(parse_int(name, v));
      return list;
    }
    case FlagKind::kDatasetDir: {
      const fs::path dir(raw.at(0));
      return json{{"train_images", (dir / "train-images-idx3-ubyte").string()},
                  {"train_labels", (dir / "train-labels-idx1-ubyte").string()},
                  {"test_images", (dir / "t10k-images-idx3-ubyte").string()},
                  {"test_labels", (dir / "t10k-labels-idx1-ubyte").string()}};
    }
  }
  return nullptr;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string() + " for writing");
  writer(out);
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed for " + path.string());
}

// Output-side paths are relative to the run directory.
fs::path output_path(const fs::path& out_dir, const std::string& configured) {
  const fs::path p(configured);
  return p.is_relative() ? out_dir / p : p;
}

std::string required_path(const json& options, const char* key, const char* flag) {
  if (options.at(key).is_null()) throw ConfigError(std::string(flag) + " is required");
  return options.at(key).get<std::string>();
}

void write_images(const fs::path& dir, const std::string& stem, const std::vector<Tensor>& images) {
  write_tensor(dir / (stem + ".tsr"), batch_tensor(images));
  write_file(dir / (stem + ".idx"), [&](std::ostream& o) { write_idx_images(o, images); });
  const fs::path preview = dir / "preview";
  fs::create_directories(preview);
  for (std::size_t i = 0; i < std::min<std::size_t>(images.size(), 8); ++i) {
    std::ostringstream name;
    name << stem << '_' << std::setw(3) << std::setfill('0') << i << ".pgm";
    write_pgm(preview / name.str(), images[i]);
  }
}

std::vector<int> cycled_labels(std::size_t n, Index num_classes) {
  std::vector<int> labels;
  if (num_classes <= 0) return labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(i % static_cast<std::size_t>(num_classes)));
  return labels;
}

void write_labels(const fs::path& dir, const std::vector<int>& labels) {
  if (labels.empty()) return;
  write_file(dir / "labels.idx", [&](std::ostream& o) { write_idx_labels(o, labels); });
}

json tau_json(double tau) { return std::isinf(tau) ? json(nullptr) : json(tau); }

using Handler = void (*)(const ExperimentConfig&, const fs::path&, std::ostream&);

void run_gen_synthetic(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("gen-synthetic");
  const std::string kind = o.at("kind").get<std::string>();
  const std::size_t n = o.at("n").get<std::size_t>();
  const std::uint64_t seed = c.seeds.front();
  if (kind == "random-labels") {
    const std::vector<int> labels = random_labels(n, o.at("num_classes").get<int>(), seed);
    write_labels(dir, labels);
    out << "kind=" << kind << " n=" << n << " labels=" << (dir / "labels.idx").string() << '\n';
    return;
  }
  const auto images = synthetic_images(kind, n, c.height, c.width, o.at("p").get<double>(), seed);
  write_images(dir, "images", images);
  out << "kind=" << kind << " n=" << n << " images=" << (dir / "images.tsr").string() << '\n';
}

void run_thresholds(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const CurveTable curve = CurveTable::standard();
  const auto [clean1, clean2] = cleaning_thresholds(default_cleaning_alpha_targets());
  const CoarseThresholds coarse = coarse_thresholds(curve);
  const double a1 = alpha_bar_of_sigma(std::exp(clean1));
  const double a2 = alpha_bar_of_sigma(std::exp(clean2));

  std::ostringstream line;
  line << std::setprecision(10);
  line << "cleaning tau1=" << std::round(clean1 * 1e9) / 1e9 << " tau2=" << std::round(clean2 * 1e9) / 1e9
       << " alpha_bar_tau1=" << a1 << " alpha_bar_tau2=" << a2 << '\n';
  line << "coarse tau1=" << coarse.tau1 << " tau2=" << coarse.tau2 << " detected_tau1=" << coarse.detected_tau1
       << " detected_tau2=" << coarse.detected_tau2 << " clamped=" << (coarse.clamped ? "true" : "false") << '\n';
  out << line.str();
  if (!coarse.warning.empty()) out << "warning: " << coarse.warning << '\n';

  const json summary = {
      {"cleaning", {{"tau1", clean1}, {"tau2", clean2}, {"alpha_bar_tau1", a1}, {"alpha_bar_tau2", a2}}},
      {"coarse",
       {{"tau1", coarse.tau1},
        {"tau2", coarse.tau2},
        {"detected_tau1", coarse.detected_tau1},
        {"detected_tau2", coarse.detected_tau2},
        {"clamped", coarse.clamped}}}};
  write_text(dir / "thresholds.json", summary.dump(2) + "\n");

  const json& curve_out = c.command("thresholds").at("curve_out");
  if (!curve_out.is_null()) {
    const fs::path path = output_path(dir, curve_out.get<std::string>());
    write_file(path, [&](std::ostream& o) { curve.write_csv(o); });
    out << "curve=" << path.string() << '\n';
  }
}

void run_train(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const std::int64_t checkpoint_every = c.command("train").at("checkpoint_every").get<std::int64_t>();
  for (const std::uint64_t seed : c.seeds) {
    const fs::path seed_dir = dir / ("seed-" + std::to_string(seed));
    fs::create_directories(seed_dir);
    const ExperimentData data = load_experiment_data(c, seed);
    DataSource private_data("private", data.train.images, data.train.labels);
    DataSource synthetic;
    if (c.variant != "baseline")
      synthetic = DataSource("synthetic", synthetic_images(c.synthetic_kind, c.synthetic_count, c.height, c.width,
                                                           c.synthetic_p, Rng::stream(seed, "synthetic").next_u64()));
    TrainRun run = make_train_run(c, synthetic, private_data, data.num_classes);
    if (checkpoint_every > 0) {
      run.checkpoint_dir = (seed_dir / "checkpoints").string();
      run.checkpoint_every = checkpoint_every;
    }
    std::ofstream metrics(seed_dir / "metrics.csv");
    write_metrics_header(metrics);
    run.metrics = &metrics;

    Rng rng = Rng::stream(seed, "train");
    const TrainResult result = train_syngen(run, rng);
    save_checkpoint(seed_dir / "model.ckpt", result.params);
    write_file(seed_dir / "ledger.csv", [&](std::ostream& o) { result.ledger.write_csv(o, c.delta); });

    const double spent = result.ledger.empty() ? 0.0 : result.ledger.epsilon(c.delta);
    const json summary = {
        {"method", method_name(c)},
        {"seed", seed},
        {"plan", {{"variant", c.variant}, {"tau1", run.plan.tau1}, {"tau2", tau_json(run.plan.tau2)}}},
        {"dp",
         {{"enabled", c.dp_enabled},
          {"target_epsilon", c.epsilon},
          {"delta", c.delta},
          {"noise_multiplier", result.dp.noise_multiplier},
          {"sampling_rate", result.dp.sampling_rate},
          {"epsilon_spent", spent},
          {"max_epsilon", result.max_epsilon}}},
        {"phase1", {{"epochs", result.phase1_epochs},
                    {"reads", {{"synthetic", result.phase1_reads.synthetic},
                               {"private", result.phase1_reads.private_data}}}}},
        {"phase2", {{"steps", result.phase2_steps},
                    {"reads", {{"synthetic", result.phase2_reads.synthetic},
                               {"private", result.phase2_reads.private_data}}}}}};
    write_text(seed_dir / "summary.json", summary.dump(2) + "\n");
    out << "seed=" << seed << " method=" << method_name(c) << " phase1_epochs=" << result.phase1_epochs
        << " phase2_steps=" << result.phase2_steps << " sigma_noise=" << result.dp.noise_multiplier
        << " epsilon=" << spent << " model=" << (seed_dir / "model.ckpt").string() << '\n';
  }
}

void run_sample(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("sample");
  const Checkpoint ckpt = load_checkpoint(required_path(o, "checkpoint", "--checkpoint"));
  const std::size_t n = o.at("n").get<std::size_t>();
  const std::vector<int> labels = cycled_labels(n, ckpt.params.config().num_classes);
  Rng rng = Rng::stream(c.seeds.front(), "sampler");
  const auto samples = ddim_sample(ckpt.params, c.sampler, n, rng, labels);
  write_images(dir, "samples", samples);
  write_labels(dir, labels);
  out << "n=" << n << " samples=" << (dir / "samples.tsr").string() << '\n';
}

void run_stage_switch(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("stage-switch");
  const Checkpoint context = load_checkpoint(required_path(o, "context_checkpoint", "--context"));
  const Checkpoint other = load_checkpoint(required_path(o, "other_checkpoint", "--other"));
  const StepBand band{o.at("band")[0].get<double>(), o.at("band")[1].get<double>()};
  if (!(band.lo < band.hi)) throw ConfigError("--band: lo must be below hi");
  const std::size_t n = o.at("n").get<std::size_t>();
  const std::vector<int> labels = cycled_labels(n, context.params.config().num_classes);
  Rng rng = Rng::stream(c.seeds.front(), "sampler");
  const auto samples = stage_switch_sample(context.params, other.params, band, c.sampler, n, rng, labels);
  write_images(dir, "samples", samples);
  write_labels(dir, labels);
  out << "n=" << n << " band=(" << band.lo << ", " << band.hi << "] samples=" << (dir / "samples.tsr").string()
      << '\n';
}

std::vector<Tensor> read_images(const fs::path& path) {
  const Tensor t = read_tensor(path);
  if (t.rank() == 3) return {t};
  return split_batch(t);
}

void run_clean_test(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("clean-test");
  const Checkpoint ckpt = load_checkpoint(required_path(o, "checkpoint", "--checkpoint"));
  const double tau = o.at("tau").get<double>();
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  if (o.at("input").is_null()) {
    const ExperimentData data = load_experiment_data(c, c.seeds.front());
    const std::size_t n = std::min<std::size_t>(64, data.test.size());
    inputs.assign(data.test.images.begin(), data.test.images.begin() + static_cast<std::ptrdiff_t>(n));
    labels.assign(data.test.labels.begin(), data.test.labels.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    inputs = read_images(o.at("input").get<std::string>());
  }
  const bool conditional = ckpt.params.config().num_classes > 0;
  Rng rng = Rng::stream(c.seeds.front(), "sampler");
  std::vector<Tensor> cleaned;
  cleaned.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const int label = conditional && i < labels.size() ? labels[i] : -1;
    cleaned.push_back(forward_then_clean(ckpt.params, inputs[i], tau, c.sampler, rng, label));
  }
  write_images(dir, "cleaned", cleaned);
  out << "n=" << cleaned.size() << " tau=" << tau << " cleaned=" << (dir / "cleaned.tsr").string() << '\n';
}

void run_verify_theorems(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("verify-theorems");
  const std::uint64_t seed = c.seeds.front();
  ToyDigitsParams digits;
  digits.height = c.height;
  digits.width = c.width;
  SaltPepperParams noise;
  noise.height = c.height;
  noise.width = c.width;

  TheoremTrial trial;
  trial.x0 = [digits](Rng& rng) -> Eigen::VectorXd {
    return toy_digit(static_cast<int>(rng.below(kToyDigitClasses)), digits, rng).data();
  };
  trial.y0 = [noise](Rng& rng) -> Eigen::VectorXd { return salt_pepper(noise, rng.next_u64()).data(); };
  trial.dimension = c.height * c.width;
  trial.nu = o.at("nu").get<double>();
  trial.gamma = o.at("gamma").get<double>();
  trial.draws = o.at("draws").get<std::size_t>();
  // Pixels lie in [0, 1].
  trial.support_diameter = std::sqrt(static_cast<double>(trial.dimension));

  const DdpmSchedule schedule = DdpmSchedule::linear();
  Rng rng = Rng::stream(seed, "theorems");
  json summary;
  Rng thm1_rng = rng.split("thm1");
  try {
    const Thm1Result r = verify_thm1(trial, schedule, thm1_rng, o.at("stride").get<int>());
    write_file(dir / "thm1.csv", [&](std::ostream& f) {
      f << "step,exceedance\n" << std::setprecision(12);
      for (std::size_t i = 0; i < r.steps.size(); ++i) f << r.steps[i] << ',' << r.exceedance[i] << '\n';
    });
    const bool certified = !r.analytic_n || static_cast<int>(r.n) <= *r.analytic_n;
    summary["thm1"] = {{"n", r.n},
                       {"analytic_n", r.analytic_n ? json(*r.analytic_n) : json(nullptr)},
                       {"certified", certified},
                       {"identity_error", r.identity_error}};
    out << "thm1 n=" << r.n << " analytic_n=" << (r.analytic_n ? std::to_string(*r.analytic_n) : "none")
        << " identity_error=" << r.identity_error << '\n';
  } catch (const ThresholdNotReached& e) {
    summary["thm1"] = {{"n", nullptr}, {"terminal_exceedance", e.terminal_exceedance()}};
    out << "thm1 n=none terminal_exceedance=" << e.terminal_exceedance() << '\n';
  }

  TheoremTrial independent = trial;
  independent.coupling = Coupling::kIndependentNoise;
  Rng energy_rng = rng.split("energy");
  const double energy = thm1_marginal_energy_distance(independent, schedule, static_cast<int>(schedule.steps()),
                                                      2000, energy_rng);
  summary["thm1"]["energy_distance_at_T"] = energy;
  out << "thm1 energy_distance_at_T=" << energy << '\n';

  Rng thm2_rng = rng.split("thm2");
  const auto alpha_bars = o.at("alpha_bars").get<std::vector<double>>();
  const BoundReport report = verify_thm2(trial, alpha_bars, o.at("thm2_nu").get<double>(), thm2_rng);
  write_file(dir / "thm2.csv", [&](std::ostream& f) { report.write_csv(f); });
  summary["thm2"] = {{"passed", report.passed()}, {"expected_diff", report.expected_diff}};
  out << "thm2 passed=" << (report.passed() ? "true" : "false") << " expected_diff=" << report.expected_diff
      << '\n';
  write_text(dir / "theorems.json", summary.dump(2) + "\n");
}

void run_evaluate(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("evaluate");
  const std::vector<Tensor> samples = read_images(required_path(o, "samples", "--samples"));
  const std::uint64_t seed = c.seeds.front();
  const ExperimentData data = load_experiment_data(c, seed);
  const Eigen::MatrixXd train = stack_columns(data.train.images);
  const Eigen::MatrixXd test = stack_columns(data.test.images);
  const Eigen::MatrixXd generated = stack_columns(samples);
  if (generated.rows() != test.rows())
    throw ConfigError("evaluate: samples have " + std::to_string(generated.rows()) + " pixels, dataset has " +
                      std::to_string(test.rows()));

  const FeatureExtractor features = FeatureExtractor::fit(train, o.at("feature_dim").get<Index>());
  MetricsRow row;
  row.method = o.at("method").get<std::string>();
  row.epsilon = o.at("epsilon").is_null() ? (c.dp_enabled ? c.epsilon : std::numeric_limits<double>::infinity())
                                          : o.at("epsilon").get<double>();
  row.seed = seed;
  row.frechet_feature_distance = frechet_feature_distance(features, test, generated);
  row.cas_logreg = std::numeric_limits<double>::quiet_NaN();
  row.cas_mlp = std::numeric_limits<double>::quiet_NaN();
  if (!o.at("sample_labels").is_null()) {
    std::ifstream in(o.at("sample_labels").get<std::string>(), std::ios::binary);
    if (!in) throw FileNotFound("cannot open " + o.at("sample_labels").get<std::string>());
    const std::vector<int> labels = read_idx_labels(in);
    if (labels.size() != samples.size())
      throw FormatError(FormatError::Kind::kCountMismatch, "evaluate: sample and label counts differ");
    ClassifierSettings settings;
    settings.epochs = o.at("classifier_epochs").get<int>();
    Rng rng = Rng::stream(seed, "cas");
    const CasReport report =
        cas(generated, labels, test, data.test.labels, data.num_classes,
            {ClassifierKind::kLogisticRegression, ClassifierKind::kMlp}, settings, rng);
    row.cas_logreg = report.accuracy(ClassifierKind::kLogisticRegression);
    row.cas_mlp = report.accuracy(ClassifierKind::kMlp);
    if (!report.warning.empty()) out << "warning: " << report.warning << '\n';
  }
  write_file(dir / "metrics.csv", [&](std::ostream& f) { write_metrics_csv(f, {row}); });
  out << "method=" << row.method << " frechet_feature_distance=" << row.frechet_feature_distance
      << " cas_logreg=" << row.cas_logreg << " cas_mlp=" << row.cas_mlp << '\n';
}

void run_account(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const json& o = c.command("account");
  const double target = o.at("epsilon").get<double>();
  const double delta = o.at("delta").get<double>();
  const double q = o.at("q").get<double>();
  const std::int64_t steps = o.at("steps").get<std::int64_t>();
  const bool calibrate = o.at("noise_multiplier").is_null();
  const double sigma = calibrate ? calibrate_noise(target, delta, q, steps) : o.at("noise_multiplier").get<double>();
  const PrivacyLedger ledger = rdp_account(q, sigma, steps);
  const EpsilonAtOrder achieved = steps == 0 ? EpsilonAtOrder{} : ledger.epsilon_at_order(delta);

  std::ostringstream line;
  line << std::setprecision(10) << "sigma_noise=" << sigma << " epsilon=" << achieved.epsilon
       << " order=" << achieved.order << " q=" << q << " steps=" << steps << " delta=" << delta << '\n';
  out << line.str();
  const json summary = {{"calibrated", calibrate},    {"noise_multiplier", sigma}, {"epsilon", achieved.epsilon},
                        {"order", achieved.order},    {"target_epsilon", target},  {"delta", delta},
                        {"sampling_rate", q},         {"steps", steps}};
  write_text(dir / "account.json", summary.dump(2) + "\n");
  const json& ledger_out = o.at("ledger_out");
  if (!ledger_out.is_null())
    write_file(output_path(dir, ledger_out.get<std::string>()), [&](std::ostream& f) { ledger.write_csv(f, delta); });
}

Handler handler_for(const std::string& name) {
  static const std::map<std::string, Handler> handlers = {
      {"gen-synthetic", run_gen_synthetic}, {"thresholds", run_thresholds},
      {"train", run_train},                 {"sample", run_sample},
      {"stage-switch", run_stage_switch},   {"clean-test", run_clean_test},
      {"verify-theorems", run_verify_theorems}, {"evaluate", run_evaluate},
      {"account", run_account}};
  return handlers.at(name);
}

std::string quoted(const std::string& message) {
  std::string out;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  return out;
}

int fail(std::ostream& err, ExitCode code, const std::string& message) {
  err << "error: code=" << exit_code_name(code) << " message=\"" << quoted(message) << "\"\n";
  return static_cast<int>(code);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private diffusion training with synthetic-data stages", "dpsyn"};
  app.require_subcommand(1, 1);
  app.fallthrough(false);

  struct Storage {
    std::uint64_t seed = 0;
    std::string config;
    std::string out;
    std::map<std::string, std::vector<std::string>> raw;
    std::map<std::string, bool> switches;
  };
  std::map<std::string, Storage> storage;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;

  for (const Command& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    Storage& s = storage[cmd.name];
    auto& opts = options[cmd.name];
    opts["--seed"] = sub->add_option("--seed", s.seed, "master seed");
    opts["--config"] = sub->add_option("--config", s.config, "JSON config file");
    opts["--out"] = sub->add_option("--out", s.out, "output directory");
    for (const Flag& f : cmd.flags) {
      CLI::Option* opt = sub->add_option(f.name, s.raw[f.name], f.help);
      switch (f.kind) {
        case FlagKind::kIntPair:
          opt->expected(2)->type_name("INT");
          break;
        case FlagKind::kNumberPair:
          opt->expected(2)->type_name("FLOAT");
          break;
        case FlagKind::kThresholds:
          opt->expected(2)->type_name("FLOAT|inf");
          break;
        case FlagKind::kIntList:
          opt->expected(1, 64)->type_name("INT");
          break;
        case FlagKind::kInt:
          opt->expected(1)->type_name("INT");
          break;
        case FlagKind::kNumber:
          opt->expected(1)->type_name("FLOAT");
          break;
        case FlagKind::kDatasetDir:
          opt->expected(1)->type_name("DIR");
          break;
        default:
          opt->expected(1)->type_name("TEXT");
          break;
      }
      opts[f.name] = opt;
    }
    for (const Switch& sw : cmd.switches) opts[sw.name] = sub->add_flag(sw.name, s.switches[sw.name], sw.help);
    subs[cmd.name] = sub;
  }

  if (args.size() > 1 && !args[1].empty() && args[1].front() != '-' &&
      std::none_of(commands().begin(), commands().end(),
                   [&](const Command& cmd) { return args[1] == cmd.name; }))
    return fail(err, ExitCode::kUsage, "unknown subcommand '" + args[1] + "'");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(err, ExitCode::kUsage, e.what());
  }

  const Command* chosen = nullptr;
  for (const Command& cmd : commands())
    if (subs[cmd.name]->parsed()) chosen = &cmd;
  if (!chosen) return fail(err, ExitCode::kUsage, "no subcommand given");
  for (const auto* sub : app.get_subcommands())
    if (sub->get_name() != chosen->name) return fail(err, ExitCode::kUsage, "only one subcommand per run");

  try {
    const Storage& s = storage[chosen->name];
    auto& opts = options[chosen->name];
    json document = s.config.empty() ? default_config() : read_config_file(s.config);
    try {
      if (opts["--seed"]->count()) document["seeds"] = json::array({s.seed});
      if (opts["--out"]->count()) document["output_dir"] = s.out;
      for (const Flag& f : chosen->flags)
        if (opts[f.name]->count()) document[json::json_pointer(f.pointer)] = flag_value(f, s.raw.at(f.name));
      for (const Switch& sw : chosen->switches)
        if (opts[sw.name]->count()) document[json::json_pointer(sw.pointer)] = sw.value;
    } catch (const UsageError& e) {
      return fail(err, ExitCode::kUsage, e.what());
    }

    const ExperimentConfig config = parse_config(document);
    const fs::path dir = resolve_output_dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FormatError(FormatError::Kind::kIo, "cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "resolved_config.json", config.document.dump(2) + "\n");
    handler_for(chosen->name)(config, dir, out);
    return 0;
  } catch (const FileNotFound& e) {
    return fail(err, ExitCode::kMissingFile, e.what());
  } catch (const ConfigError& e) {
    return fail(err, ExitCode::kConfig, e.what());
  } catch (const InvalidArgument& e) {
    return fail(err, ExitCode::kConfig, e.what());
  } catch (const NumericalError& e) {
    return fail(err, ExitCode::kNumerical, e.what());
  } catch (const InfeasibleError& e) {
    return fail(err, ExitCode::kInfeasible, e.what());
  } catch (const FormatError& e) {
    return fail(err, ExitCode::kFormat, e.what());
  } catch (const OutOfRegion& e) {
    return fail(err, ExitCode::kConfig, e.what());
  } catch (const json::exception& e) {
    return fail(err, ExitCode::kConfig, e.what());
  } catch (const std::exception& e) {
    return fail(err, ExitCode::kFailure, e.what());
  }
}

}  // namespace dpsyn

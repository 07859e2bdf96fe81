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

#include "dpsyn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dpsyn/adam.hpp"
#include "dpsyn/checkpoint.hpp"

namespace dpsyn {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Writer {
  std::ostream* out;
  void row(const char* phase, std::int64_t step, double loss, double ln_sigma_mean, double epsilon) {
    if (!out) return;
    *out << phase << ',' << step << ',' << loss << ',' << ln_sigma_mean << ',' << epsilon << '\n';
  }
};

std::vector<int> labels_for(const DataSource& source, const std::vector<std::size_t>& indices,
                            bool conditional) {
  std::vector<int> labels;
  if (!conditional || !source.labelled()) return labels;
  labels.reserve(indices.size());
  for (std::size_t i : indices) labels.push_back(source.label(i));
  return labels;
}

void maybe_checkpoint(const TrainRun& run, std::int64_t global_step, const DenoiserParams& params,
                      const AdamState& adam) {
  if (run.checkpoint_every <= 0 || run.checkpoint_dir.empty()) return;
  if (global_step % run.checkpoint_every != 0) return;
  std::filesystem::create_directories(run.checkpoint_dir);
  save_checkpoint(std::filesystem::path(run.checkpoint_dir) / ("step_" + std::to_string(global_step) + ".ckpt"),
                  params, &adam);
}

// One epoch of shuffled minibatch EDM training; returns the mean batch loss.
double minibatch_epoch(const TrainRun& run, const DataSource& source, const SigmaDistribution& law,
                       std::size_t batch_size, DenoiserParams& params, AdamState& adam, Rng& data_rng,
                       Rng& noise_rng, SigmaLog& sigma_log, const char* phase, std::int64_t& step,
                       std::int64_t& global_step, Writer& writer, std::int64_t max_steps) {
  const bool conditional = run.model.num_classes > 0;
  std::vector<std::size_t> order(source.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), data_rng.engine());
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size() && step < max_steps; start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(stop));
    const Eigen::MatrixXd x0 = to_model_space(run.model, source.gather(batch));
    const std::vector<int> labels = labels_for(source, batch, conditional);
    SigmaLog batch_log;
    Eigen::VectorXd sigmas(x0.cols());
    for (Index j = 0; j < x0.cols(); ++j) {
      const double ln_sigma = sample_ln_sigma(law, noise_rng);
      batch_log.record(ln_sigma, law.admits(ln_sigma));
      sigmas[j] = std::exp(ln_sigma);
    }
    const Eigen::MatrixXd eta = noise_rng.normal_matrix(x0.rows(), x0.cols());
    const LossAndGradient lg = value_and_gradient(params.parameter_count(), [&](ad::Tape& tape, double* sink) {
      return edm_loss_graph(tape, params, sink, x0, sigmas, eta, labels);
    });
    adam_step(adam, params, lg.gradient);
    sigma_log.merge(batch_log);
    total += lg.loss;
    ++batches;
    ++step;
    ++global_step;
    writer.row(phase, step, lg.loss, batch_log.mean(), 0.0);
    maybe_checkpoint(run, global_step, params, adam);
  }
  return batches ? total / static_cast<double>(batches) : kNaN;
}

bool converged(const std::vector<double>& losses, int window, double min_improvement) {
  const std::size_t w = static_cast<std::size_t>(window);
  if (window < 1 || losses.size() < 2 * w) return false;
  const auto end = losses.end();
  const double recent = std::accumulate(end - static_cast<std::ptrdiff_t>(w), end, 0.0) / window;
  const double before =
      std::accumulate(end - static_cast<std::ptrdiff_t>(2 * w), end - static_cast<std::ptrdiff_t>(w), 0.0) / window;
  return (before - recent) < min_improvement * std::abs(before);
}

}  // namespace

void TrainRun::validate() const {
  if (!private_data || private_data->empty()) throw ConfigError("train: private data source is empty");
  if (pretrain && (!synthetic || synthetic->empty()))
    throw ConfigError("train: synthetic data source is empty");
  if (private_data->shape() != model.image_shape())
    throw ConfigError("train: private images have shape " + shape_string(private_data->shape()) +
                      ", model expects " + shape_string(model.image_shape()));
  if (pretrain && synthetic->shape() != model.image_shape())
    throw ConfigError("train: synthetic images do not match the model shape");
  if (phase1.batch_size == 0 || phase2.batch_size == 0) throw ConfigError("train: batch size must be positive");
  if (phase1.max_epochs < 0) throw ConfigError("train: negative pretraining epochs");
  if (!(phase2.scaled_epochs() >= 0.0)) throw ConfigError("train: negative private epochs");
  plan.synthetic_law.validate();
  plan.private_law.validate();
  if (phase2.differentially_private) derived_dp().validate();
}

DPConfig TrainRun::derived_dp() const {
  DPConfig out = dp;
  const double n = static_cast<double>(private_data ? private_data->size() : 0);
  if (n > 0) {
    out.sampling_rate = std::min(1.0, static_cast<double>(phase2.batch_size) / n);
    out.steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(phase2.scaled_epochs() / out.sampling_rate - 1e-9)));
  }
  return out;
}

void write_metrics_header(std::ostream& out) { out << "phase,step,loss,ln_sigma_mean,epsilon_so_far\n"; }

TrainResult train_syngen(const TrainRun& run, Rng& rng) {
  run.validate();
  Rng init_rng = rng.split("init");
  Rng data_rng = rng.split("data");
  Rng sigma_rng = rng.split("sigma");
  Rng dp_rng = rng.split("dp-noise");

  TrainResult result;
  result.params = run.initial ? *run.initial : DenoiserParams::init(run.model, init_rng);
  if (result.params.config().image_shape() != run.model.image_shape() ||
      result.params.config().num_classes != run.model.num_classes)
    throw ConfigError("train: initial parameters do not match the model config");
  DenoiserParams& params = result.params;
  Writer writer{run.metrics};
  std::int64_t global_step = 0;

  auto snapshot = [&] {
    return PhaseReads{run.synthetic ? run.synthetic->reads() : 0, run.private_data->reads()};
  };
  auto delta = [](PhaseReads after, PhaseReads before) {
    return PhaseReads{after.synthetic - before.synthetic, after.private_data - before.private_data};
  };

  // Phase 1: synthetic data only.
  PhaseReads before = snapshot();
  if (run.pretrain && run.phase1.max_epochs > 0) {
    AdamState adam = AdamState::for_parameters(params.parameter_count(), run.phase1.learning_rate);
    std::int64_t step = 0;
    for (int epoch = 0; epoch < run.phase1.max_epochs; ++epoch) {
      result.phase1_epoch_losses.push_back(minibatch_epoch(
          run, *run.synthetic, run.plan.synthetic_law, run.phase1.batch_size, params, adam, data_rng,
          sigma_rng, result.phase1_sigma, "pretrain", step, global_step, writer,
          std::numeric_limits<std::int64_t>::max()));
      ++result.phase1_epochs;
      if (converged(result.phase1_epoch_losses, run.phase1.window, run.phase1.min_improvement)) break;
    }
  }
  PhaseReads after = snapshot();
  result.phase1_reads = delta(after, before);
  result.ledger_steps_after_phase1 = result.ledger.steps();

  // Phase 2: private data only.
  before = after;
  const DataSource& priv = *run.private_data;
  const bool conditional = run.model.num_classes > 0;
  AdamState adam = AdamState::for_parameters(params.parameter_count(), run.phase2.learning_rate);
  if (!run.phase2.differentially_private) {
    const std::size_t per_epoch = (priv.size() + run.phase2.batch_size - 1) / run.phase2.batch_size;
    const std::int64_t max_steps =
        static_cast<std::int64_t>(std::ceil(run.phase2.scaled_epochs() * static_cast<double>(per_epoch) - 1e-9));
    std::int64_t step = 0;
    while (step < max_steps) {
      minibatch_epoch(run, priv, run.plan.private_law, run.phase2.batch_size, params, adam, data_rng,
                      sigma_rng, result.phase2_sigma, "private", step, global_step, writer, max_steps);
    }
    result.phase2_steps = step;
  } else {
    result.dp = run.derived_dp();
    DPConfig& dp = result.dp;
    if (!dp.calibrated())
      dp.noise_multiplier = calibrate_noise(dp.epsilon, dp.delta, dp.sampling_rate, dp.steps);
    const double lot = static_cast<double>(run.phase2.batch_size);
    for (std::int64_t step = 1; step <= dp.steps; ++step) {
      const Eigen::VectorXd next_rdp = result.ledger.rdp_after(dp.sampling_rate, dp.noise_multiplier);
      const double next_eps = rdp_to_epsilon(next_rdp, result.ledger.orders(), dp.delta).epsilon;
      if (next_eps > dp.epsilon) {
        std::ostringstream msg;
        msg << "privacy budget exhausted before step " << step << ": epsilon would reach " << next_eps
            << " > " << dp.epsilon;
        throw BudgetExhausted(msg.str(), result.ledger);
      }
      const std::vector<std::size_t> lot_indices = poisson_lot(priv.size(), dp.sampling_rate, data_rng);
      const Eigen::MatrixXd x0 = to_model_space(run.model, priv.gather(lot_indices));
      const std::vector<int> labels = labels_for(priv, lot_indices, conditional);
      SigmaLog step_log;
      std::vector<double> losses;
      const Shape shape = priv.shape();
      const ExampleLoss loss = [&](ad::Tape& tape, double* sink, std::size_t j) {
        const std::vector<double> sigmas =
            draw_sigmas(run.plan.private_law, dp.multiplicity, sigma_rng, &step_log);
        return multiplicity_loss(tape, params, sink, Tensor(shape, x0.col(static_cast<Index>(j))), sigmas,
                                 sigma_rng, labels.empty() ? -1 : labels[j]);
      };
      std::vector<GradientVector> grads;
      if (!lot_indices.empty())
        grads = per_sample_gradients(params.parameter_count(), loss, lot_indices.size(), &losses);
      const GradientVector noisy =
          noisy_aggregate(grads, params.parameter_count(), dp.clip_norm, dp.noise_multiplier, lot, dp_rng);
      adam_step(adam, params, noisy);
      result.ledger.record(dp.sampling_rate, dp.noise_multiplier);
      const double eps = result.ledger.epsilon(dp.delta);
      result.max_epsilon = std::max(result.max_epsilon, eps);
      result.phase2_sigma.merge(step_log);
      ++global_step;
      result.phase2_steps = step;
      const double mean_loss =
          losses.empty() ? kNaN : std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
      writer.row("private", step, mean_loss, step_log.count ? step_log.mean() : kNaN, eps);
      maybe_checkpoint(run, global_step, params, adam);
    }
  }
  result.phase2_reads = delta(snapshot(), before);
  return result;
}

}  // namespace dpsyn

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

#ifndef DPSYN_TRAINER_HPP_
#define DPSYN_TRAINER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpsyn/accountant.hpp"
#include "dpsyn/data_source.hpp"
#include "dpsyn/denoiser.hpp"
#include "dpsyn/dp.hpp"
#include "dpsyn/edm_loss.hpp"
#include "dpsyn/error.hpp"
#include "dpsyn/rng.hpp"
#include "dpsyn/stages.hpp"

namespace dpsyn {

// Non-private training on the synthetic source. Stops after max_epochs, or
// earlier once the mean loss of the last `window` epochs improves on the
// window before it by less than `min_improvement` (relative).
struct PretrainSettings {
  int max_epochs = 100;
  std::size_t batch_size = 128;
  double learning_rate = 3e-4;
  int window = 5;
  double min_improvement = 0.005;
};

struct PrivatePhaseSettings {
  // Epochs N over the private set; the run takes N * epoch_multiplier.
  double epochs = 250.0;
  double epoch_multiplier = 1.0;
  // When false the phase is ordinary minibatch training (toy protocols).
  bool differentially_private = true;
  // Expected Poisson lot size L (q = L / |private|) in the DP mode, the
  // minibatch size otherwise.
  std::size_t batch_size = 128;
  double learning_rate = 3e-4;

  double scaled_epochs() const { return epochs * epoch_multiplier; }
};

struct TrainRun {
  DenoiserConfig model;
  StagePlan plan;
  // Phase 1 is skipped when false (the untruncated DP baseline).
  bool pretrain = true;
  const DataSource* synthetic = nullptr;
  const DataSource* private_data = nullptr;
  PretrainSettings phase1;
  PrivatePhaseSettings phase2;
  // sampling_rate and steps are derived from the private set and phase2.
  DPConfig dp;
  // Overrides the random initialisation.
  std::optional<DenoiserParams> initial;
  std::string checkpoint_dir;
  std::int64_t checkpoint_every = 0;
  // CSV rows phase,step,loss,ln_sigma_mean,epsilon_so_far.
  std::ostream* metrics = nullptr;

  void validate() const;
  // `dp` with q = L / |private| and steps = ceil(scaled epochs / q); the
  // noise multiplier is left as configured.
  DPConfig derived_dp() const;
};

struct PhaseReads {
  std::size_t synthetic = 0;
  std::size_t private_data = 0;
};

struct TrainResult {
  DenoiserParams params;
  DPConfig dp;
  PrivacyLedger ledger;
  SigmaLog phase1_sigma;
  SigmaLog phase2_sigma;
  PhaseReads phase1_reads;
  PhaseReads phase2_reads;
  int phase1_epochs = 0;
  std::vector<double> phase1_epoch_losses;
  std::int64_t phase2_steps = 0;
  // Largest ledger epsilon observed after any step.
  double max_epsilon = 0.0;
  // Ledger size at the phase boundary.
  std::int64_t ledger_steps_after_phase1 = 0;
};

// Phase 2 stopped because the next step would exceed the target epsilon.
class BudgetExhausted : public InfeasibleError {
 public:
  BudgetExhausted(const std::string& what, PrivacyLedger ledger)
      : InfeasibleError(what), ledger_(std::move(ledger)) {}
  const PrivacyLedger& ledger() const { return ledger_; }

 private:
  PrivacyLedger ledger_;
};

// Two-phase training: non-private pretraining on synthetic data under the
// plan's synthetic sigma law, then DP-SGD (DP-Adam) with noise multiplicity
// on private data under the plan's private law.
TrainResult train_syngen(const TrainRun& run, Rng& rng);

void write_metrics_header(std::ostream& out);

}  // namespace dpsyn

#endif  // DPSYN_TRAINER_HPP_

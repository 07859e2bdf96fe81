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


#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dpsyn/data_source.hpp"
#include "dpsyn/sampler.hpp"
#include "dpsyn/stages.hpp"
#include "dpsyn/synthgen.hpp"
#include "dpsyn/toy_data.hpp"
#include "dpsyn/trainer.hpp"
#include "support/fixtures.hpp"

namespace dpsyn {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(SamplerGrid, EndpointsAreExactAndLevelsDecrease) {
  for (int steps : {2, 3, 18, 64, 257}) {
    SamplerGrid grid;
    grid.steps = steps;
    const auto s = grid.sigmas();
    ASSERT_EQ(s.size(), static_cast<std::size_t>(steps));
    EXPECT_EQ(s.front(), 80.0);
    EXPECT_EQ(s.back(), 0.002);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i], s[i - 1]);
  }
}

TEST(SamplerGrid, KarrasWarpAtTheMidpoint) {
  SamplerGrid grid;
  grid.steps = 3;
  const double mid = std::pow((std::pow(80.0, 1 / 7.0) + std::pow(0.002, 1 / 7.0)) / 2.0, 7.0);
  EXPECT_NEAR(grid.sigmas()[1], mid, 1e-12 * mid);
}

TEST(SamplerGrid, InvalidGridsAreRejected) {
  SamplerGrid grid;
  grid.steps = 1;
  EXPECT_THROW(grid.sigmas(), ConfigError);
  grid = SamplerGrid{};
  grid.sigma_min = 100.0;
  EXPECT_THROW(grid.sigmas(), ConfigError);
}

TEST(Ddim, SinglePointDataConvergesToThePoint) {
  Rng rng(1);
  const VectorXd target = rng.normal_vector(9);
  const DenoiseFn oracle = [&](const MatrixXd& x, double, std::size_t) {
    return MatrixXd(target.replicate(1, x.cols()));
  };
  const MatrixXd out = ddim_integrate(oracle, 80.0 * rng.normal_matrix(9, 5), SamplerGrid{}.sigmas());
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    EXPECT_LT((out.col(j) - target).lpNorm<Eigen::Infinity>(), 1e-3);
}

TEST(Ddim, GaussianDataFollowsTheExactFlow) {
  // For data N(0, s^2 I) the optimal denoiser is s^2 / (s^2 + sigma^2) x and
  // the probability flow scales x_T by s / sqrt(s^2 + sigma_max^2). The
  // update is first order, so the error halves with twice the levels.
  const double s = 0.5;
  const DenoiseFn oracle = [&](const MatrixXd& x, double sigma, std::size_t) {
    return MatrixXd(s * s / (s * s + sigma * sigma) * x);
  };
  Rng rng(2);
  const MatrixXd xt = 80.0 * rng.normal_matrix(4, 3);
  const MatrixXd exact = s / std::sqrt(s * s + 80.0 * 80.0) * xt;
  auto error = [&](int steps) {
    SamplerGrid grid;
    grid.steps = steps;
    std::vector<double> levels = grid.sigmas();
    levels.push_back(1e-9);  // integrate essentially to zero before the final jump
    return (ddim_integrate(oracle, xt, levels) - exact).norm() / exact.norm();
  };
  const double coarse = error(256);
  const double fine = error(512);
  EXPECT_LT(coarse, 2e-2);
  EXPECT_NEAR(coarse / fine, 2.0, 0.2);
}

TEST(Ddim, NonFiniteStateNamesTheStep) {
  const DenoiseFn broken = [](const MatrixXd& x, double sigma, std::size_t) {
    return sigma < 1.0 ? MatrixXd(MatrixXd::Constant(x.rows(), x.cols(), std::nan(""))) : x;
  };
  try {
    ddim_integrate(broken, MatrixXd::Ones(2, 1), SamplerGrid{}.sigmas());
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

class SamplerModels : public ::testing::Test {
 protected:
  SamplerModels() {
    Rng rng(3);
    a_ = DenoiserParams::init(testing::tiny_config(4, {8}), rng, false);
    b_ = DenoiserParams::init(testing::tiny_config(4, {8}), rng, false);
    grid_.steps = 16;
  }
  DenoiserParams a_;
  DenoiserParams b_;
  SamplerGrid grid_;
};

TEST_F(SamplerModels, EmptyRequestGivesEmptyBatch) {
  Rng rng(0);
  EXPECT_TRUE(ddim_sample(a_, grid_, 0, rng).empty());
}

TEST_F(SamplerModels, SamplingIsDeterministic) {
  Rng r1(9);
  Rng r2(9);
  const auto s1 = ddim_sample(a_, grid_, 6, r1);
  const auto s2 = ddim_sample(a_, grid_, 6, r2);
  ASSERT_EQ(s1.size(), 6u);
  for (std::size_t i = 0; i < s1.size(); ++i) EXPECT_EQ(s1[i], s2[i]);
}

TEST_F(SamplerModels, SwitchBetweenIdenticalModelsIsPlainSampling) {
  Rng r1(4);
  Rng r2(4);
  const auto plain = ddim_sample(a_, grid_, 5, r1);
  const auto switched = stage_switch_sample(a_, a_, StepBand{}, grid_, 5, r2);
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(plain[i], switched[i]);
}

TEST_F(SamplerModels, BandCoveringTheGridUsesOnlyTheContextModel) {
  Rng r1(5);
  Rng r2(5);
  const auto plain = ddim_sample(a_, grid_, 5, r1);
  const LnSigmaBand all{std::log(grid_.sigma_min) - 1.0, std::log(grid_.sigma_max)};
  const auto switched = stage_switch_sample(a_, b_, all, grid_, 5, r2);
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(plain[i], switched[i]);
}

TEST_F(SamplerModels, DisjointBandUsesOnlyTheOtherModel) {
  Rng r1(6);
  Rng r2(6);
  const auto plain = ddim_sample(b_, grid_, 5, r1);
  // A band strictly between two adjacent levels holds none of them.
  const auto sigmas = grid_.sigmas();
  const LnSigmaBand gap{std::log(sigmas[6]) + 1e-9, std::log(sigmas[5]) - 1e-9};
  const auto switched = stage_switch_sample(a_, b_, gap, grid_, 5, r2);
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(plain[i], switched[i]);
}

TEST_F(SamplerModels, FullStepBandUsesOnlyTheContextModel) {
  Rng r1(7);
  Rng r2(7);
  const auto plain = ddim_sample(a_, grid_, 4, r1);
  const auto switched = stage_switch_sample(a_, b_, StepBand{0.0, 1.0}, grid_, 4, r2);
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(plain[i], switched[i]);
}

TEST_F(SamplerModels, BandsOutsideTheGridAreRejected) {
  Rng rng(0);
  EXPECT_THROW(stage_switch_sample(a_, b_, LnSigmaBand{10.0, 11.0}, grid_, 2, rng), InvalidArgument);
  EXPECT_THROW(stage_switch_sample(a_, b_, StepBand{0.5, 0.5}, grid_, 2, rng), InvalidArgument);
}

TEST_F(SamplerModels, ClassLabelsMustMatchTheBatch) {
  Rng rng(0);
  EXPECT_THROW(ddim_sample(a_, grid_, 3, rng, {1, 2}), InvalidArgument);
}

TEST(StepBand, PositionsAlongTheTrajectory) {
  const StepBand band;
  // 5 levels sit at t / T = 1, 0.75, 0.5, 0.25, 0.
  EXPECT_FALSE(band.contains(0, 5));
  EXPECT_TRUE(band.contains(1, 5));
  EXPECT_TRUE(band.contains(2, 5));
  EXPECT_FALSE(band.contains(3, 5));
  EXPECT_FALSE(band.contains(4, 5));
}

TEST(DdpmStepBand, MapsStepsThroughTheSchedule) {
  const DdpmSchedule schedule = DdpmSchedule::linear();
  const LnSigmaBand band = ddpm_step_band(schedule, 250, 750);
  EXPECT_NEAR(band.lo, std::log(schedule.sigma(250)), 1e-12);
  EXPECT_NEAR(band.hi, std::log(schedule.sigma(750)), 1e-12);
  EXPECT_THROW(ddpm_step_band(schedule, 0, 10), InvalidArgument);
}

TEST(ForwardThenClean, SmallestNoiseLevelBarelyChangesTheImage) {
  Rng init(7);
  const DenoiserParams params = DenoiserParams::init(testing::tiny_config(4, {8}), init);
  SamplerGrid grid;
  Rng rng(8);
  Tensor x(params.config().image_shape());
  x.data() = VectorXd::LinSpaced(16, 0.0, 1.0);
  const Tensor out = forward_then_clean(params, x, std::log(grid.sigma_min), grid, rng);
  // Pixel-space noise floor sigma_min / 2 per unit of eta.
  EXPECT_LT((out.data() - x.data()).lpNorm<Eigen::Infinity>(), 6.0 * grid.sigma_min);
}

TEST(ForwardThenClean, DeterministicAndRangeChecked) {
  Rng init(7);
  const DenoiserParams params = DenoiserParams::init(testing::tiny_config(4, {8}), init, false);
  const SamplerGrid grid;
  const Tensor x = Tensor::constant(params.config().image_shape(), 0.4);
  Rng r1(3);
  Rng r2(3);
  EXPECT_EQ(forward_then_clean(params, x, -2.0, grid, r1), forward_then_clean(params, x, -2.0, grid, r2));
  EXPECT_THROW(forward_then_clean(params, x, 10.0, grid, r1), InvalidArgument);
}

// Toy-scale data and a shared trained model for the trainer checks.
class Training : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const LabelledImages digits = make_toy_digits(1000, 31);
    private_ = new DataSource("private", digits.images, digits.labels);
    std::vector<Tensor> leaves;
    DeadLeavesParams dl;
    for (std::uint64_t i = 0; i < 300; ++i) leaves.push_back(dead_leaves(dl, i));
    synthetic_ = new DataSource("synthetic", leaves);
  }
  static void TearDownTestSuite() {
    delete private_;
    delete synthetic_;
  }

  static TrainRun small_run(Variant variant, double tau1, double tau2) {
    private_->reset_reads();
    synthetic_->reset_reads();
    TrainRun run;
    run.model = testing::tiny_config(16, {16});
    run.plan = make_stage_plan(variant, tau1, tau2);
    run.synthetic = synthetic_;
    run.private_data = private_;
    run.phase1.max_epochs = 3;
    run.phase1.learning_rate = 1e-3;
    run.phase2.epochs = 1.0;
    run.phase2.batch_size = 200;
    run.phase2.learning_rate = 1e-3;
    run.dp.multiplicity = 4;
    return run;
  }

  static DataSource* private_;
  static DataSource* synthetic_;
};

DataSource* Training::private_ = nullptr;
DataSource* Training::synthetic_ = nullptr;

TEST_F(Training, CoarsePlanKeepsEveryDrawOnItsSide) {
  TrainRun run = small_run(Variant::kCoarse, 2.0, 3.0);
  std::ostringstream metrics;
  write_metrics_header(metrics);
  run.metrics = &metrics;
  Rng rng(1);
  const TrainResult result = train_syngen(run, rng);
  EXPECT_GT(result.phase1_sigma.count, 0u);
  EXPECT_EQ(result.phase1_sigma.violations, 0u);
  EXPECT_GT(result.phase1_sigma.min, 2.0);
  EXPECT_GT(result.phase2_sigma.count, 0u);
  EXPECT_EQ(result.phase2_sigma.violations, 0u);
  EXPECT_LE(result.phase2_sigma.max, 3.0);
  // Isolation: each phase reads only its own source.
  EXPECT_EQ(result.phase1_reads.private_data, 0u);
  EXPECT_GT(result.phase1_reads.synthetic, 0u);
  EXPECT_EQ(result.phase2_reads.synthetic, 0u);
  EXPECT_GT(result.phase2_reads.private_data, 0u);
  EXPECT_EQ(result.ledger_steps_after_phase1, 0);
  EXPECT_EQ(result.phase2_steps, result.dp.steps);
  EXPECT_LE(result.max_epsilon, run.dp.epsilon);
  std::istringstream in(metrics.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "phase,step,loss,ln_sigma_mean,epsilon_so_far");
  std::size_t pretrain_rows = 0;
  std::size_t private_rows = 0;
  while (std::getline(in, line)) {
    pretrain_rows += line.rfind("pretrain,", 0) == 0;
    private_rows += line.rfind("private,", 0) == 0;
  }
  EXPECT_GT(pretrain_rows, 0u);
  EXPECT_EQ(private_rows, static_cast<std::size_t>(result.phase2_steps));
}

TEST_F(Training, DerivedBudgetFollowsTheLotSize) {
  TrainRun run = small_run(Variant::kCoarse, 2.0, 3.0);
  run.phase2.epochs = 2.0;
  const DPConfig dp = run.derived_dp();
  EXPECT_DOUBLE_EQ(dp.sampling_rate, 0.2);
  EXPECT_EQ(dp.steps, 10);
}

TEST_F(Training, FineTunePrivateDrawsAreUntruncated) {
  TrainRun run = small_run(Variant::kFineTune, 2.0, kUnboundedTau);
  run.phase1.max_epochs = 1;
  run.phase2.epochs = 5.0;
  run.dp.multiplicity = 16;
  Rng rng(2);
  const TrainResult result = train_syngen(run, rng);
  EXPECT_LT(result.phase2_sigma.min, -3.0);
  EXPECT_GT(result.phase2_sigma.max, 3.0);
}

TEST_F(Training, LargeBudgetIsSpentAlmostExactly) {
  TrainRun run = small_run(Variant::kCoarse, 2.0, 3.0);
  run.phase1.max_epochs = 0;
  run.dp.epsilon = 10.0;
  Rng rng(3);
  const TrainResult result = train_syngen(run, rng);
  const double eps = result.ledger.epsilon(run.dp.delta);
  EXPECT_GE(eps, 9.99);
  EXPECT_LE(eps, 10.0);
}

TEST_F(Training, UndersizedNoiseStopsBeforeOverspending) {
  TrainRun run = small_run(Variant::kCoarse, 2.0, 3.0);
  run.phase1.max_epochs = 0;
  run.phase2.epochs = 3.0;
  run.dp.noise_multiplier = 0.6;
  Rng rng(4);
  try {
    train_syngen(run, rng);
    FAIL() << "expected BudgetExhausted";
  } catch (const BudgetExhausted& e) {
    EXPECT_LE(e.ledger().epsilon(run.dp.delta), run.dp.epsilon);
    EXPECT_LT(e.ledger().steps(), run.derived_dp().steps);
  }
}

TEST_F(Training, PretrainingRunsToItsBudgetWithoutAPlateau) {
  TrainRun run = small_run(Variant::kCoarse, 2.0, 3.0);
  run.phase1.max_epochs = 4;
  run.phase1.window = 10;
  run.phase2.epochs = 0.2;
  Rng rng(5);
  const TrainResult result = train_syngen(run, rng);
  EXPECT_EQ(result.phase1_epochs, 4);
  EXPECT_EQ(result.phase1_epoch_losses.size(), 4u);
}

TEST_F(Training, ShapeMismatchIsAConfigError) {
  TrainRun run = small_run(Variant::kCoarse, 2.0, 3.0);
  run.model = testing::tiny_config(8, {16});
  Rng rng(6);
  EXPECT_THROW(train_syngen(run, rng), ConfigError);
}

TEST_F(Training, CleaningNearTheDataShrinksReconstructionError) {
  // Ordinary training, then noise to sigma = 0.05 and clean.
  TrainRun run = small_run(Variant::kFineTune, 2.0, kUnboundedTau);
  run.model.hidden = {64};
  run.pretrain = false;
  run.phase2.differentially_private = false;
  run.phase2.epochs = 15.0;
  run.phase2.batch_size = 32;
  Rng rng(7);
  const TrainResult result = train_syngen(run, rng);
  const LabelledImages held_out = make_toy_digits(64, 99);
  const double sigma = 0.05;
  Rng clean_rng(8);
  double mse = 0.0;
  for (const Tensor& x : held_out.images) {
    const Tensor out = forward_then_clean(result.params, x, std::log(sigma), SamplerGrid{}, clean_rng);
    // Model space is twice pixel space.
    mse += 4.0 * (out.data() - x.data()).squaredNorm() / static_cast<double>(x.size());
  }
  mse /= static_cast<double>(held_out.size());
  EXPECT_LE(mse, 5.0 * sigma * sigma);
}

}  // namespace
}  // namespace dpsyn

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


#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>

#include <gtest/gtest.h>

#include "dpsyn/data_source.hpp"
#include "dpsyn/diffusion.hpp"
#include "dpsyn/stages.hpp"

namespace dpsyn {
namespace {

using Eigen::Index;
using Eigen::VectorXd;

// Exhaustive max distance to the chord of the min-max normalised curve.
Index brute_force_elbow(const VectorXd& x_raw, const VectorXd& y_raw) {
  const VectorXd x = (x_raw.array() - x_raw.minCoeff()) / (x_raw.maxCoeff() - x_raw.minCoeff());
  const VectorXd y = (y_raw.array() - y_raw.minCoeff()) / (y_raw.maxCoeff() - y_raw.minCoeff());
  const Index last = x.size() - 1;
  const double dx = x[last] - x[0];
  const double dy = y[last] - y[0];
  Index best = 0;
  double best_distance = -1.0;
  for (Index i = 0; i <= last; ++i) {
    const double distance = std::abs(dy * (x[i] - x[0]) - dx * (y[i] - y[0])) / std::hypot(dx, dy);
    if (distance > best_distance) {
      best_distance = distance;
      best = i;
    }
  }
  return best;
}

TEST(CleaningThresholds, HalfRetentionIsUnitSigma) {
  const auto [tau1, tau2] = cleaning_thresholds({0.9, 0.5});
  EXPECT_NEAR(tau2, 0.0, 1e-15);
  EXPECT_NEAR(tau1, std::log(std::sqrt(1.0 / 0.9 - 1.0)), 1e-15);
}

TEST(CleaningThresholds, DefaultTargetsGiveMinusFourAndMinusThree) {
  const auto targets = default_cleaning_alpha_targets();
  EXPECT_NEAR(targets.first, 0.99966464987, 1e-10);
  EXPECT_NEAR(targets.second, 0.99752737684, 1e-10);
  const auto [tau1, tau2] = cleaning_thresholds(targets);
  EXPECT_NEAR(tau1, -4.0, 1e-9);
  EXPECT_NEAR(tau2, -3.0, 1e-9);
}

TEST(CleaningThresholds, RoundTripThroughAlphaBar) {
  for (double a1 = 0.6; a1 < 0.99999; a1 = 1.0 - (1.0 - a1) / 3.0) {
    const double a2 = a1 - (1.0 - a1);
    const auto [tau1, tau2] = cleaning_thresholds({a1, a2});
    EXPECT_NEAR(alpha_bar_of_sigma(std::exp(tau1)) / a1, 1.0, 1e-12);
    EXPECT_NEAR(alpha_bar_of_sigma(std::exp(tau2)) / a2, 1.0, 1e-12);
  }
}

TEST(CleaningThresholds, RejectsBadTargets) {
  EXPECT_THROW(cleaning_thresholds({1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(cleaning_thresholds({0.9, 0.0}), InvalidArgument);
  EXPECT_THROW(cleaning_thresholds({0.5, 0.9}), InvalidArgument);
}

TEST(CurveTable, StandardGridAndColumns) {
  const CurveTable curve = CurveTable::standard();
  ASSERT_EQ(curve.ln_sigma.size(), 1201);
  EXPECT_DOUBLE_EQ(curve.ln_sigma[0], -6.0);
  EXPECT_DOUBLE_EQ(curve.ln_sigma[1200], 6.0);
  for (Index i = 0; i < curve.ln_sigma.size(); ++i) {
    const double s = std::exp(curve.ln_sigma[i]);
    EXPECT_NEAR(curve.alpha_bar[i], 1.0 / (1.0 + s * s), 1e-15);
    EXPECT_NEAR(curve.snr[i] * s * s, 1.0, 1e-12);
  }
  EXPECT_NO_THROW(curve.validate());
}

TEST(CurveTable, NonMonotoneColumnIsRejected) {
  CurveTable curve = CurveTable::build(-5.0, 5.0, 101);
  curve.snr[50] = curve.snr[49] * 2.0;
  EXPECT_THROW(curve.validate(), InvalidArgument);
  EXPECT_THROW(coarse_thresholds(curve), InvalidArgument);
}

TEST(CurveTable, CsvHasHeaderAndOneRowPerPoint) {
  const CurveTable curve = CurveTable::build(-1.0, 1.0, 5);
  std::ostringstream out;
  curve.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "ln_sigma,alpha_bar,snr");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST(CoarseThresholds, ElbowMatchesBruteForceOnTheStandardCurve) {
  const CurveTable curve = CurveTable::standard();
  EXPECT_EQ(snr_elbow_index(curve), brute_force_elbow(curve.ln_sigma, curve.snr));
}

TEST(CoarseThresholds, ElbowMatchesBruteForceOnOtherCurves) {
  for (double hi : {4.0, 5.0, 7.5}) {
    const CurveTable curve = CurveTable::build(-hi, hi, 801);
    EXPECT_EQ(snr_elbow_index(curve), brute_force_elbow(curve.ln_sigma, curve.snr)) << hi;
  }
}

TEST(CoarseThresholds, ElbowShiftsByTheLogOfTheScale) {
  const CurveTable base = CurveTable::build(-6.0, 6.0, 1201);
  for (double scale : {0.5, 3.0, 20.0}) {
    CurveTable shifted = base;
    // SNR of sigma' = scale * sigma, tabulated over ln sigma' = ln sigma + ln scale.
    shifted.ln_sigma = base.ln_sigma.array() + std::log(scale);
    const Index i = snr_elbow_index(base);
    const Index j = snr_elbow_index(shifted);
    EXPECT_EQ(i, j);
    EXPECT_NEAR(shifted.ln_sigma[j] - base.ln_sigma[i], std::log(scale), 1e-12);
  }
}

TEST(CoarseThresholds, StandardCurveResolvesToTheDefaults) {
  const CoarseThresholds t = coarse_thresholds(CurveTable::standard());
  EXPECT_EQ(t.tau1, 2.0);
  EXPECT_EQ(t.tau2, 3.0);
  // The chord elbow of the normalised curve sits far below the defaults, so
  // the detection is replaced and flagged.
  EXPECT_TRUE(t.clamped);
  EXPECT_FALSE(t.warning.empty());
  EXPECT_LT(t.detected_tau1, t.detected_tau2);
}

TEST(CoarseThresholds, DetectionWithinToleranceIsKept) {
  CoarseThresholdOptions options;
  options.default_tau1 = -4.4;
  options.default_tau2 = -3.6;
  const CoarseThresholds t = coarse_thresholds(CurveTable::standard(), options);
  EXPECT_FALSE(t.clamped);
  EXPECT_EQ(t.tau1, t.detected_tau1);
  EXPECT_EQ(t.tau2, t.detected_tau2);
}

TEST(CoarseThresholds, NarrowCurveIsRejected) {
  EXPECT_THROW(coarse_thresholds(CurveTable::build(-3.0, 3.0, 601)), InvalidArgument);
}

TEST(StagePlan, CoarseTruncations) {
  const StagePlan plan = make_stage_plan(Variant::kCoarse, 2.0, 3.0);
  EXPECT_EQ(plan.synthetic_law.truncation, Truncation::kUpperTail);
  EXPECT_EQ(plan.synthetic_law.tau, 2.0);
  EXPECT_EQ(plan.private_law.truncation, Truncation::kLowerTail);
  EXPECT_EQ(plan.private_law.tau, 3.0);
  EXPECT_FALSE(plan.uncovered_band().has_value());
}

TEST(StagePlan, CleaningTruncationsAndUncoveredBand) {
  const StagePlan plan = make_stage_plan(Variant::kCleaning, -4.0, -3.0);
  EXPECT_EQ(plan.synthetic_law.truncation, Truncation::kLowerTail);
  EXPECT_EQ(plan.synthetic_law.tau, -4.0);
  EXPECT_EQ(plan.private_law.truncation, Truncation::kUpperTail);
  EXPECT_EQ(plan.private_law.tau, -3.0);
  const auto band = plan.uncovered_band();
  ASSERT_TRUE(band.has_value());
  EXPECT_EQ(band->first, -4.0);
  EXPECT_EQ(band->second, -3.0);
}

TEST(StagePlan, FineTuneLeavesThePrivateLawUntruncated) {
  const StagePlan plan = make_stage_plan(Variant::kFineTune, 2.0, kUnboundedTau);
  EXPECT_EQ(plan.synthetic_law.truncation, Truncation::kUpperTail);
  EXPECT_EQ(plan.private_law.truncation, Truncation::kNone);
  EXPECT_THROW(make_stage_plan(Variant::kFineTune, 2.0, 3.0), ConfigError);
}

TEST(StagePlan, InconsistentThresholdsAreRejected) {
  EXPECT_THROW(make_stage_plan(Variant::kCoarse, 3.0, 2.0), ConfigError);
  EXPECT_THROW(make_stage_plan(Variant::kCoarse, std::nan(""), 2.0), ConfigError);
}

TEST(StagePlan, CoarsePlansCoverEveryNoiseLevel) {
  for (double tau1 = -2.0; tau1 <= 4.0; tau1 += 0.5) {
    for (double gap : {0.0, 0.5, 1.0, 3.0}) {
      const StagePlan plan = make_stage_plan(Variant::kCoarse, tau1, tau1 + gap);
      for (double ln_sigma = -10.0; ln_sigma <= 10.0; ln_sigma += 0.01)
        ASSERT_TRUE(plan.synthetic_law.admits(ln_sigma) || plan.private_law.admits(ln_sigma))
            << tau1 << " " << gap << " " << ln_sigma;
    }
  }
}

TEST(StagePlan, BaseLawParametersCarryThrough) {
  const StagePlan plan =
      make_stage_plan(Variant::kCoarse, 2.0, 3.0, SigmaDistribution::untruncated(-0.5, 2.0));
  EXPECT_EQ(plan.synthetic_law.p_mean, -0.5);
  EXPECT_EQ(plan.private_law.p_std, 2.0);
}

TEST(StagePlan, PlanningTakesNoDataset) {
  static_assert(!std::is_invocable_v<decltype(&make_stage_plan), Variant, double, double, DataSource>);
  static_assert(!std::is_invocable_v<decltype(&coarse_thresholds), DataSource>);
  static_assert(!std::is_invocable_v<decltype(&cleaning_thresholds), DataSource>);
  SUCCEED();
}

TEST(Variant, NamesRoundTrip) {
  for (Variant v : {Variant::kCoarse, Variant::kCleaning, Variant::kFineTune})
    EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("middle"), ConfigError);
}

}  // namespace
}  // namespace dpsyn

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

#ifndef DPSYN_STAGES_HPP_
#define DPSYN_STAGES_HPP_

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "dpsyn/sigma.hpp"

namespace dpsyn {

// Which stage of the trajectory the synthetic data trains.
enum class Variant { kCoarse, kCleaning, kFineTune };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

// alpha_bar and SNR sampled on an increasing grid of ln sigma.
struct CurveTable {
  Eigen::VectorXd ln_sigma;
  Eigen::VectorXd alpha_bar;
  Eigen::VectorXd snr;

  // Evenly spaced grid over [lo, hi] with `points` entries.
  static CurveTable build(double ln_sigma_lo, double ln_sigma_hi, Eigen::Index points);
  // The curve the coarse thresholds are read from: ln sigma in [-6, 6],
  // step 0.01.
  static CurveTable standard();

  // Throws InvalidArgument unless the grid is strictly increasing and both
  // columns strictly decreasing.
  void validate() const;

  // CSV with header "ln_sigma,alpha_bar,snr".
  void write_csv(std::ostream& out) const;
};

inline constexpr double kDefaultCoarseTau1 = 2.0;
inline constexpr double kDefaultCoarseTau2 = 3.0;
inline constexpr double kDefaultCleaningTau1 = -4.0;
inline constexpr double kDefaultCleaningTau2 = -3.0;

// alpha_bar targets whose ln sigma solutions are exactly the default
// cleaning thresholds (-4, -3).
std::pair<double, double> default_cleaning_alpha_targets();

// Solves alpha_bar(sigma) = target for each target: ln sqrt(1/a - 1).
std::pair<double, double> cleaning_thresholds(std::pair<double, double> alpha_targets);

struct CoarseThresholdOptions {
  // tau2 is the first grid point whose normalised SNR is at most this
  // fraction of the normalised SNR at tau1.
  double flatness_fraction = 0.2;
  double default_tau1 = kDefaultCoarseTau1;
  double default_tau2 = kDefaultCoarseTau2;
  // Detections farther than this from the defaults are replaced by them.
  double clamp_tolerance = 1.0;
};

struct CoarseThresholds {
  double tau1 = kDefaultCoarseTau1;
  double tau2 = kDefaultCoarseTau2;
  Eigen::Index elbow_index = 0;
  double detected_tau1 = 0.0;
  double detected_tau2 = 0.0;
  bool clamped = false;
  std::string warning;
};

// Grid index of the point farthest from the chord joining the end points of
// the min-max normalised SNR-vs-ln sigma curve.
Eigen::Index snr_elbow_index(const CurveTable& curve);

CoarseThresholds coarse_thresholds(const CurveTable& curve,
                                   const CoarseThresholdOptions& options = {});

// Thresholds and the two sigma laws of a staged run. tau2 may be +infinity.
struct StagePlan {
  Variant variant = Variant::kCoarse;
  double tau1 = kDefaultCoarseTau1;
  double tau2 = kDefaultCoarseTau2;
  SigmaDistribution synthetic_law;
  SigmaDistribution private_law;

  // The ln sigma band trained by neither law, if any.
  std::optional<std::pair<double, double>> uncovered_band() const;
};

StagePlan make_stage_plan(Variant variant, double tau1, double tau2,
                          const SigmaDistribution& base_law = SigmaDistribution::untruncated());

inline constexpr double kUnboundedTau = std::numeric_limits<double>::infinity();

}  // namespace dpsyn

#endif  // DPSYN_STAGES_HPP_

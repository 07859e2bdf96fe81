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

#include "dpsyn/stages.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "dpsyn/diffusion.hpp"
#include "dpsyn/error.hpp"

namespace dpsyn {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kCoarse:
      return "coarse";
    case Variant::kCleaning:
      return "cleaning";
    case Variant::kFineTune:
      return "finetune";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "coarse") return Variant::kCoarse;
  if (name == "cleaning") return Variant::kCleaning;
  if (name == "finetune") return Variant::kFineTune;
  throw ConfigError("unknown variant '" + name + "' (expected coarse, cleaning or finetune)");
}

CurveTable CurveTable::build(double lo, double hi, Eigen::Index points) {
  if (!(hi > lo) || points < 2) throw InvalidArgument("CurveTable::build: need lo < hi and >= 2 points");
  CurveTable c;
  c.ln_sigma.resize(points);
  c.alpha_bar.resize(points);
  c.snr.resize(points);
  for (Eigen::Index i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double sigma = std::exp(x);
    c.ln_sigma[i] = x;
    c.alpha_bar[i] = alpha_bar_of_sigma(sigma);
    c.snr[i] = snr_of_sigma(sigma);
  }
  return c;
}

CurveTable CurveTable::standard() { return build(-6.0, 6.0, 1201); }

void CurveTable::validate() const {
  const Eigen::Index n = ln_sigma.size();
  if (n < 2 || alpha_bar.size() != n || snr.size() != n)
    throw InvalidArgument("CurveTable: columns must have equal length >= 2");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(ln_sigma[i] > ln_sigma[i - 1]))
      throw InvalidArgument("CurveTable: ln sigma grid not strictly increasing at row " + std::to_string(i));
    if (!(alpha_bar[i] < alpha_bar[i - 1]))
      throw InvalidArgument("CurveTable: alpha_bar not strictly decreasing at row " + std::to_string(i));
    if (!(snr[i] < snr[i - 1]))
      throw InvalidArgument("CurveTable: SNR not strictly decreasing at row " + std::to_string(i));
  }
}

void CurveTable::write_csv(std::ostream& out) const {
  out << "ln_sigma,alpha_bar,snr\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < ln_sigma.size(); ++i)
    out << ln_sigma[i] << ',' << alpha_bar[i] << ',' << snr[i] << '\n';
}

std::pair<double, double> default_cleaning_alpha_targets() {
  return {1.0 / (1.0 + std::exp(2.0 * kDefaultCleaningTau1)),
          1.0 / (1.0 + std::exp(2.0 * kDefaultCleaningTau2))};
}

std::pair<double, double> cleaning_thresholds(std::pair<double, double> alpha_targets) {
  const auto [first, second] = alpha_targets;
  for (double a : {first, second})
    if (!(a > 0.0 && a < 1.0))
      throw InvalidArgument("cleaning_thresholds: alpha_bar target " + std::to_string(a) +
                            " outside (0, 1)");
  if (!(first > second))
    throw InvalidArgument("cleaning_thresholds: first target must exceed the second (tau1 < tau2)");
  // ln sqrt(1/a - 1) = 0.5 ln((1 - a) / a); log1p keeps precision near a = 1.
  auto solve = [](double a) { return 0.5 * (std::log1p(-a) - std::log(a)); };
  return {solve(first), solve(second)};
}

Eigen::Index snr_elbow_index(const CurveTable& curve) {
  curve.validate();
  const Eigen::Index n = curve.ln_sigma.size();
  const double x0 = curve.ln_sigma[0];
  const double x1 = curve.ln_sigma[n - 1];
  const double y_hi = curve.snr[0];
  const double y_lo = curve.snr[n - 1];
  // Normalised chord runs from (0, 1) to (1, 0); the distance of (x, y) to it
  // is |x + y - 1| / sqrt(2).
  Eigen::Index best = 0;
  double best_distance = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xn = (curve.ln_sigma[i] - x0) / (x1 - x0);
    const double yn = (curve.snr[i] - y_lo) / (y_hi - y_lo);
    const double distance = std::abs(xn + yn - 1.0) / std::sqrt(2.0);
    if (distance > best_distance) {
      best_distance = distance;
      best = i;
    }
  }
  return best;
}

CoarseThresholds coarse_thresholds(const CurveTable& curve, const CoarseThresholdOptions& options) {
  curve.validate();
  const Eigen::Index n = curve.ln_sigma.size();
  if (curve.ln_sigma[0] > -5.0 || curve.ln_sigma[n - 1] < 5.0)
    throw InvalidArgument("coarse_thresholds: curve must cover ln sigma in [-5, 5]");

  CoarseThresholds result;
  result.elbow_index = snr_elbow_index(curve);
  result.detected_tau1 = curve.ln_sigma[result.elbow_index];

  const double y_hi = curve.snr[0];
  const double y_lo = curve.snr[n - 1];
  auto normalised = [&](Eigen::Index i) { return (curve.snr[i] - y_lo) / (y_hi - y_lo); };
  const double target = options.flatness_fraction * normalised(result.elbow_index);
  Eigen::Index flat = n - 1;
  for (Eigen::Index i = result.elbow_index; i < n; ++i) {
    if (normalised(i) <= target) {
      flat = i;
      break;
    }
  }
  result.detected_tau2 = curve.ln_sigma[flat];

  result.tau1 = result.detected_tau1;
  result.tau2 = result.detected_tau2;
  std::ostringstream warning;
  if (std::abs(result.detected_tau1 - options.default_tau1) > options.clamp_tolerance) {
    result.tau1 = options.default_tau1;
    result.clamped = true;
    warning << "detected elbow ln sigma = " << result.detected_tau1 << " replaced by "
            << options.default_tau1 << "; ";
  }
  if (std::abs(result.detected_tau2 - options.default_tau2) > options.clamp_tolerance) {
    result.tau2 = options.default_tau2;
    result.clamped = true;
    warning << "detected flattening ln sigma = " << result.detected_tau2 << " replaced by "
            << options.default_tau2;
  }
  result.warning = warning.str();
  return result;
}

std::optional<std::pair<double, double>> StagePlan::uncovered_band() const {
  switch (variant) {
    case Variant::kCoarse:
    case Variant::kFineTune:
      // Synthetic keeps ln sigma > tau1, private keeps ln sigma <= tau2.
      if (tau2 < tau1) return std::make_pair(tau2, tau1);
      return std::nullopt;
    case Variant::kCleaning:
      // Synthetic keeps ln sigma <= tau1, private keeps ln sigma > tau2.
      if (tau2 > tau1) return std::make_pair(tau1, tau2);
      return std::nullopt;
  }
  return std::nullopt;
}

StagePlan make_stage_plan(Variant variant, double tau1, double tau2,
                          const SigmaDistribution& base_law) {
  if (!std::isfinite(tau1)) throw ConfigError("stage plan: tau1 must be finite");
  if (std::isnan(tau2)) throw ConfigError("stage plan: tau2 is NaN");
  StagePlan plan;
  plan.variant = variant;
  plan.tau1 = tau1;
  plan.tau2 = tau2;
  SigmaDistribution base = base_law;
  base.truncation = Truncation::kNone;
  switch (variant) {
    case Variant::kFineTune:
      if (!std::isinf(tau2) || tau2 < 0)
        throw ConfigError("stage plan: finetune requires tau2 = +infinity");
      [[fallthrough]];
    case Variant::kCoarse:
      if (tau2 < tau1)
        throw ConfigError("stage plan: coarse requires tau1 <= tau2 (got " + std::to_string(tau1) +
                          ", " + std::to_string(tau2) + ")");
      plan.synthetic_law = SigmaDistribution::upper_tail(tau1, base.p_mean, base.p_std);
      plan.private_law = std::isinf(tau2) ? base
                                          : SigmaDistribution::lower_tail(tau2, base.p_mean, base.p_std);
      break;
    case Variant::kCleaning:
      if (!std::isfinite(tau2)) throw ConfigError("stage plan: cleaning requires a finite tau2");
      plan.synthetic_law = SigmaDistribution::lower_tail(tau1, base.p_mean, base.p_std);
      plan.private_law = SigmaDistribution::upper_tail(tau2, base.p_mean, base.p_std);
      break;
  }
  plan.synthetic_law.validate();
  plan.private_law.validate();
  return plan;
}

}  // namespace dpsyn

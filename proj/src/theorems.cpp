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

#include "dpsyn/theorems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

Eigen::MatrixXd draw_columns(const TheoremTrial::Sampler& sampler, Eigen::Index d, std::size_t n,
                             Rng& rng) {
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::VectorXd v = sampler(rng);
    if (v.size() != d) throw InvalidArgument("theorem trial: sampler returned the wrong dimension");
    out.col(static_cast<Eigen::Index>(j)) = v;
  }
  return out;
}

// Pairwise Euclidean distances between columns of a and b.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::VectorXd na = a.colwise().squaredNorm().transpose();
  const Eigen::RowVectorXd nb = b.colwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (a.transpose() * b);
  d2.colwise() += na;
  d2.rowwise() += nb;
  return d2.cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

void TheoremTrial::validate() const {
  if (!x0 || !y0) throw InvalidArgument("theorem trial: both samplers are required");
  if (dimension < 1) throw InvalidArgument("theorem trial: dimension must be positive");
  if (!(nu > 0.0)) throw InvalidArgument("theorem trial: nu must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("theorem trial: gamma must lie in [0, 1)");
  if (draws < 1000) throw InvalidArgument("theorem trial: need at least 1000 draws");
}

std::optional<int> thm1_analytic_n(const DdpmSchedule& schedule, double diameter, double nu) {
  for (int n = 1; n <= schedule.steps(); ++n)
    if (std::sqrt(schedule.alpha_bar(n)) * diameter <= nu) return n;
  return std::nullopt;
}

Thm1Result verify_thm1(const TheoremTrial& trial, const DdpmSchedule& schedule, Rng& rng, int stride) {
  trial.validate();
  if (trial.coupling != Coupling::kSharedNoise)
    throw InvalidArgument("verify_thm1: the pathwise check needs shared noise");
  if (stride < 1) throw InvalidArgument("verify_thm1: stride must be positive");
  const Eigen::Index d = trial.dimension;
  const std::size_t m = trial.draws;
  Rng data_rng = rng.split("data");
  Rng noise_rng = rng.split("noise");
  const Eigen::MatrixXd x0 = draw_columns(trial.x0, d, m, data_rng);
  const Eigen::MatrixXd y0 = draw_columns(trial.y0, d, m, data_rng);
  const Eigen::MatrixXd eta = noise_rng.normal_matrix(d, static_cast<Eigen::Index>(m));
  const Eigen::RowVectorXd base = (x0 - y0).colwise().norm();

  Thm1Result result;
  result.empirical_diameter = base.size() ? base.maxCoeff() : 0.0;
  if (trial.support_diameter) result.analytic_n = thm1_analytic_n(schedule, *trial.support_diameter, trial.nu);
  const int t_max = schedule.steps();
  for (int n = 1; n <= t_max; n = (n == t_max) ? t_max + 1 : std::min(n + stride, t_max)) {
    const double a = schedule.alpha_bar(n);
    const double s = std::sqrt(a);
    const double c = std::sqrt(1.0 - a);
    std::size_t over = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto k = static_cast<Eigen::Index>(j);
      const Eigen::VectorXd xn = s * x0.col(k) + c * eta.col(k);
      const Eigen::VectorXd yn = s * y0.col(k) + c * eta.col(k);
      const double dist = (xn - yn).norm();
      result.identity_error = std::max(result.identity_error, std::abs(dist - s * base[k]));
      if (dist > trial.nu) ++over;
    }
    result.steps.push_back(n);
    result.exceedance.push_back(static_cast<double>(over) / static_cast<double>(m));
  }
  if (result.exceedance.back() > trial.gamma) {
    std::ostringstream msg;
    msg << "verify_thm1: exceedance at step " << t_max << " is " << result.exceedance.back()
        << " > gamma " << trial.gamma;
    throw ThresholdNotReached(msg.str(), result.exceedance.back());
  }
  std::size_t first = result.exceedance.size() - 1;
  while (first > 0 && result.exceedance[first - 1] <= trial.gamma) --first;
  result.n = static_cast<std::size_t>(result.steps[first]);
  return result;
}

double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("energy_distance: dimension mismatch");
  if (a.cols() < 2 || b.cols() < 2) throw InvalidArgument("energy_distance: need two samples per set");
  const double na = static_cast<double>(a.cols());
  const double nb = static_cast<double>(b.cols());
  const double cross = pairwise_distances(a, b).mean();
  // Diagonals are zero, so the off-diagonal mean is sum / (n (n - 1)).
  const double within_a = pairwise_distances(a, a).sum() / (na * (na - 1.0));
  const double within_b = pairwise_distances(b, b).sum() / (nb * (nb - 1.0));
  return 2.0 * cross - within_a - within_b;
}

double thm1_marginal_energy_distance(const TheoremTrial& trial, const DdpmSchedule& schedule, int n,
                                     std::size_t samples, Rng& rng) {
  if (!trial.x0 || !trial.y0) throw InvalidArgument("energy check: both samplers are required");
  if (n < 1 || n > schedule.steps()) throw InvalidArgument("energy check: step outside the schedule");
  Rng data_rng = rng.split("data");
  Rng noise_rng = rng.split("noise");
  const Eigen::Index d = trial.dimension;
  const Eigen::MatrixXd x0 = draw_columns(trial.x0, d, samples, data_rng);
  const Eigen::MatrixXd y0 = draw_columns(trial.y0, d, samples, data_rng);
  const Eigen::MatrixXd xn = ddpm_forward(x0, n, schedule, noise_rng.normal_matrix(d, x0.cols()));
  const Eigen::MatrixXd yn = ddpm_forward(y0, n, schedule, noise_rng.normal_matrix(d, y0.cols()));
  return energy_distance(xn, yn);
}

bool thm2_in_region(double a, double nu, double d) {
  if (!(a > 0.0 && a < 1.0) || !(nu > 0.0) || !(d > 0.0)) return false;
  return nu * nu / (8.0 * d * (1.0 - a)) >= std::numbers::e;
}

double thm2_gamma(double a, double nu, double d, double expected_diff) {
  if (!(expected_diff >= 0.0)) throw InvalidArgument("thm2_gamma: expected difference must be >= 0");
  if (!thm2_in_region(a, nu, d)) {
    std::ostringstream msg;
    msg << "thm2_gamma: (alpha_bar " << a << ", nu " << nu << ", d " << d
        << ") is outside the region nu^2 / (8 d (1 - alpha_bar)) >= e";
    throw OutOfRegion(msg.str());
  }
  const double one_minus = 1.0 - a;
  const double markov = 2.0 * (1.0 - std::sqrt(a)) / nu * expected_diff;
  const double chernoff = std::exp(-nu * nu / (16.0 * one_minus) + d / 2.0 -
                                   d / 2.0 * std::log(nu * nu / (8.0 * d * one_minus)));
  return markov + chernoff;
}

const char* to_string(BoundStatus status) {
  switch (status) {
    case BoundStatus::kPass: return "pass";
    case BoundStatus::kFail: return "fail";
    case BoundStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

bool BoundReport::passed() const {
  for (const auto& r : rows)
    if (r.status == BoundStatus::kFail) return false;
  return true;
}

void BoundReport::write_csv(std::ostream& out) const {
  out << "alpha_bar,empirical_p,gamma_bound,slack,status\n";
  out.precision(12);
  for (const auto& r : rows)
    out << r.alpha_bar << ',' << r.empirical_p << ',' << r.gamma_bound << ',' << r.slack << ','
        << to_string(r.status) << '\n';
}

double monte_carlo_slack(double p, std::size_t draws) {
  return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
}

BoundReport verify_thm2(const TheoremTrial& trial, const std::vector<double>& alpha_bars, double nu,
                        Rng& rng) {
  trial.validate();
  if (!(nu > 0.0)) throw InvalidArgument("verify_thm2: nu must be positive");
  const Eigen::Index d = trial.dimension;
  const std::size_t m = trial.draws;
  BoundReport report;
  {
    Rng diff_rng = rng.split("expected-diff");
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += (trial.x0(diff_rng) - trial.y0(diff_rng)).norm();
    report.expected_diff = total / static_cast<double>(m);
  }
  for (std::size_t g = 0; g < alpha_bars.size(); ++g) {
    const double a = alpha_bars[g];
    if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("verify_thm2: alpha_bar must lie in (0, 1]");
    Rng point_rng = rng.split("alpha-bar-" + std::to_string(g));
    const double s = std::sqrt(a);
    const double c = std::sqrt(1.0 - a);
    std::size_t over = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const Eigen::VectorXd x0 = trial.x0(point_rng);
      const Eigen::VectorXd y0 = trial.y0(point_rng);
      const Eigen::VectorXd z1 = point_rng.normal_vector(d);
      const Eigen::VectorXd z2 = point_rng.normal_vector(d);
      const Eigen::VectorXd xt = s * x0 + c * z1;
      const Eigen::VectorXd yt = s * y0 + c * z2;
      const Eigen::VectorXd direct = xt - x0 - (yt - y0);
      const Eigen::VectorXd decomposed = (s - 1.0) * (x0 - y0) + c * (z1 - z2);
      report.identity_error = std::max(report.identity_error, (direct - decomposed).lpNorm<Eigen::Infinity>());
      if (direct.norm() > nu) ++over;
    }
    BoundRow row;
    row.alpha_bar = a;
    row.empirical_p = static_cast<double>(over) / static_cast<double>(m);
    row.slack = monte_carlo_slack(row.empirical_p, m);
    if (thm2_in_region(a, nu, static_cast<double>(d))) {
      row.gamma_bound = thm2_gamma(a, nu, static_cast<double>(d), report.expected_diff);
      row.status = row.empirical_p <= row.gamma_bound + row.slack ? BoundStatus::kPass : BoundStatus::kFail;
    } else {
      row.gamma_bound = std::numeric_limits<double>::quiet_NaN();
      row.status = BoundStatus::kSkipped;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dpsyn

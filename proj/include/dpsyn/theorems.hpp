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

#ifndef DPSYN_THEOREMS_HPP_
#define DPSYN_THEOREMS_HPP_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/diffusion.hpp"
#include "dpsyn/rng.hpp"

namespace dpsyn {

enum class Coupling { kSharedNoise, kIndependentNoise };

// Two data distributions to push through the forward process.
struct TheoremTrial {
  using Sampler = std::function<Eigen::VectorXd(Rng&)>;

  Sampler x0;
  Sampler y0;
  Eigen::Index dimension = 0;
  double nu = 0.5;
  double gamma = 0.05;
  std::size_t draws = 20000;
  Coupling coupling = Coupling::kSharedNoise;
  // Diameter of the union of both supports, when known.
  std::optional<double> support_diameter;

  void validate() const;
};

// ||X_n - Y_n|| <= nu with probability >= 1 - gamma from step N on.
struct Thm1Result {
  std::size_t n = 0;
  // Checked steps and the empirical P(||X_n - Y_n|| > nu) at each.
  std::vector<int> steps;
  std::vector<double> exceedance;
  // max over draws and checked steps of | ||X_n - Y_n|| - sqrt(abar_n) ||X0 - Y0|| |.
  double identity_error = 0.0;
  // Largest ||X0 - Y0|| among the draws.
  double empirical_diameter = 0.0;
  // min{n : sqrt(abar_n) D <= nu} for the trial's support diameter.
  std::optional<int> analytic_n;
};

class ThresholdNotReached : public std::runtime_error {
 public:
  ThresholdNotReached(const std::string& what, double terminal_exceedance)
      : std::runtime_error(what), terminal_exceedance_(terminal_exceedance) {}
  double terminal_exceedance() const { return terminal_exceedance_; }

 private:
  double terminal_exceedance_;
};

// Shared-noise check on steps 1, 1 + stride, ..., T (T always included).
// Returns the first checked step from which the exceedance stays <= gamma.
// Throws ThresholdNotReached when step T still exceeds gamma.
Thm1Result verify_thm1(const TheoremTrial& trial, const DdpmSchedule& schedule, Rng& rng,
                       int stride = 1);

// Smallest n with sqrt(abar_n) * diameter <= nu, if any.
std::optional<int> thm1_analytic_n(const DdpmSchedule& schedule, double diameter, double nu);

// Unbiased (U-statistic) energy distance between two sample sets
// stored as columns.
double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Energy distance between independently noised X_n and Y_n samples.
double thm1_marginal_energy_distance(const TheoremTrial& trial, const DdpmSchedule& schedule, int n,
                                     std::size_t samples, Rng& rng);

// (2(1 - sqrt(a)) / nu) E||X0 - Y0|| + exp(-nu^2 / (16(1 - a)) + d/2 - (d/2) ln(nu^2 / (8d(1 - a)))).
// Throws OutOfRegion unless 0 < a < 1 and nu^2 / (8d(1 - a)) >= e.
double thm2_gamma(double alpha_bar, double nu, double dimension, double expected_diff);

bool thm2_in_region(double alpha_bar, double nu, double dimension);

enum class BoundStatus { kPass, kFail, kSkipped };
const char* to_string(BoundStatus status);

struct BoundRow {
  double alpha_bar = 0.0;
  double empirical_p = 0.0;
  // NaN when skipped.
  double gamma_bound = 0.0;
  double slack = 0.0;
  BoundStatus status = BoundStatus::kSkipped;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  double expected_diff = 0.0;
  double identity_error = 0.0;

  bool passed() const;
  // alpha_bar,empirical_p,gamma_bound,slack,status
  void write_csv(std::ostream& out) const;
};

// 4 sqrt(p (1 - p) / M).
double monte_carlo_slack(double p, std::size_t draws);

// Independent Z1, Z2 per draw; one fresh stream per grid point.
BoundReport verify_thm2(const TheoremTrial& trial, const std::vector<double>& alpha_bars, double nu,
                        Rng& rng);

}  // namespace dpsyn

#endif  // DPSYN_THEOREMS_HPP_

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

#ifndef DPSYN_ACCOUNTANT_HPP_
#define DPSYN_ACCOUNTANT_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace dpsyn {

// {1.25, 1.5, 2, 3, ..., 64, 128, 256}.
const std::vector<double>& default_rdp_orders();

// Renyi DP of one step of the Poisson-subsampled Gaussian mechanism with
// sampling rate q and noise multiplier sigma, at each order.
Eigen::VectorXd subsampled_gaussian_rdp(double q, double noise_multiplier,
                                        const std::vector<double>& orders);

// Smallest eps(alpha) = rdp(alpha) + log(1/delta) / (alpha - 1) over the grid.
struct EpsilonAtOrder {
  double epsilon = 0.0;
  double order = 0.0;
};
EpsilonAtOrder rdp_to_epsilon(const Eigen::VectorXd& rdp, const std::vector<double>& orders,
                              double delta);

// Composed privacy cost of a sequence of subsampled Gaussian steps.
class PrivacyLedger {
 public:
  struct StepRecord {
    double sampling_rate = 0.0;
    double noise_multiplier = 0.0;
    std::int64_t count = 0;
  };

  explicit PrivacyLedger(std::vector<double> orders = default_rdp_orders());

  // Adds `count` steps at (q, sigma). Throws InvalidArgument for q outside
  // (0, 1] or sigma <= 0.
  void record(double sampling_rate, double noise_multiplier, std::int64_t count = 1);

  // Appends another ledger's steps; orders must match.
  void compose(const PrivacyLedger& other);

  // RDP this ledger would hold after `count` more steps at (q, sigma).
  Eigen::VectorXd rdp_after(double sampling_rate, double noise_multiplier,
                            std::int64_t count = 1) const;

  const std::vector<double>& orders() const { return orders_; }
  const Eigen::VectorXd& rdp() const { return rdp_; }
  const std::vector<StepRecord>& records() const { return records_; }
  std::int64_t steps() const { return steps_; }
  bool empty() const { return steps_ == 0; }

  double epsilon(double delta) const { return rdp_to_epsilon(rdp_, orders_, delta).epsilon; }
  EpsilonAtOrder epsilon_at_order(double delta) const { return rdp_to_epsilon(rdp_, orders_, delta); }

  // CSV: step,q,sigma_noise,epsilon with epsilon cumulative at `delta`.
  void write_csv(std::ostream& out, double delta) const;

 private:
  std::vector<double> orders_;
  Eigen::VectorXd rdp_;
  std::vector<StepRecord> records_;
  std::int64_t steps_ = 0;
};

PrivacyLedger rdp_account(double sampling_rate, double noise_multiplier, std::int64_t steps,
                          const std::vector<double>& orders = default_rdp_orders());

// Noise multiplier whose accounted epsilon lies in [0.999 target, target].
// Throws InfeasibleError when even sigma = 1e4 overshoots the target.
double calibrate_noise(double target_epsilon, double delta, double sampling_rate,
                       std::int64_t steps, const std::vector<double>& orders = default_rdp_orders());

inline constexpr double kMaxNoiseMultiplier = 1e4;
inline constexpr double kCalibrationTolerance = 0.999;

}  // namespace dpsyn

#endif  // DPSYN_ACCOUNTANT_HPP_

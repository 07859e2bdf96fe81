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

#include "dpsyn/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)) for a >= b.
double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (a <= b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

double log_erfc(double x) {
  if (x < 20.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows near x = 27.
  const double x2 = x * x;
  return -x2 - std::log(x) - 0.5 * std::log(std::numbers::pi) +
         std::log1p(-0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2));
}

// Generalised binomial coefficient for real alpha, integer i.
double binom(double alpha, int i) {
  double c = 1.0;
  for (int k = 0; k < i; ++k) c *= (alpha - k) / (k + 1);
  return c;
}

double log_a_integer(double q, double sigma, int alpha) {
  double log_a = kNegInf;
  for (int i = 0; i <= alpha; ++i) {
    const double log_coef = std::lgamma(alpha + 1.0) - std::lgamma(i + 1.0) - std::lgamma(alpha - i + 1.0);
    const double s = log_coef + i * std::log(q) + (alpha - i) * std::log1p(-q) +
                     (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma);
    log_a = log_add(log_a, s);
  }
  return log_a;
}

double log_a_fractional(double q, double sigma, double alpha) {
  double log_a0 = kNegInf;
  double log_a1 = kNegInf;
  const double z0 = sigma * sigma * std::log(1.0 / q - 1.0) + 0.5;
  for (int i = 0; i < 100000; ++i) {
    const double coef = binom(alpha, i);
    const double log_coef = std::log(std::abs(coef));
    const double j = alpha - i;
    const double log_t0 = log_coef + i * std::log(q) + j * std::log1p(-q);
    const double log_t1 = log_coef + j * std::log(q) + i * std::log1p(-q);
    const double log_e0 = std::log(0.5) + log_erfc((i - z0) / (std::numbers::sqrt2 * sigma));
    const double log_e1 = std::log(0.5) + log_erfc((z0 - j) / (std::numbers::sqrt2 * sigma));
    const double log_s0 = log_t0 + (static_cast<double>(i) * i - i) / (2.0 * sigma * sigma) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * sigma * sigma) + log_e1;
    if (coef > 0) {
      log_a0 = log_add(log_a0, log_s0);
      log_a1 = log_add(log_a1, log_s1);
    } else {
      log_a0 = log_sub(log_a0, log_s0);
      log_a1 = log_sub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0) break;
  }
  return log_add(log_a0, log_a1);
}

void check_mechanism(double q, double sigma) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("accountant: sampling rate must lie in (0, 1]");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("accountant: noise multiplier must be positive");
}

}  // namespace

const std::vector<double>& default_rdp_orders() {
  static const std::vector<double> orders = [] {
    std::vector<double> o = {1.25, 1.5};
    for (int a = 2; a <= 64; ++a) o.push_back(a);
    o.push_back(128);
    o.push_back(256);
    return o;
  }();
  return orders;
}

Eigen::VectorXd subsampled_gaussian_rdp(double q, double sigma, const std::vector<double>& orders) {
  check_mechanism(q, sigma);
  Eigen::VectorXd rdp(static_cast<Eigen::Index>(orders.size()));
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const double alpha = orders[k];
    if (!(alpha > 1.0)) throw InvalidArgument("accountant: orders must exceed 1");
    double value;
    if (q == 1.0) {
      value = alpha / (2.0 * sigma * sigma);
    } else if (alpha == std::floor(alpha)) {
      value = log_a_integer(q, sigma, static_cast<int>(alpha)) / (alpha - 1.0);
    } else {
      value = log_a_fractional(q, sigma, alpha) / (alpha - 1.0);
    }
    rdp[static_cast<Eigen::Index>(k)] = std::max(value, 0.0);
  }
  return rdp;
}

EpsilonAtOrder rdp_to_epsilon(const Eigen::VectorXd& rdp, const std::vector<double>& orders,
                              double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("accountant: delta must lie in (0, 1)");
  if (rdp.size() != static_cast<Eigen::Index>(orders.size()))
    throw InvalidArgument("accountant: rdp and order grid differ in length");
  EpsilonAtOrder best{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const double eps = rdp[static_cast<Eigen::Index>(k)] + std::log(1.0 / delta) / (orders[k] - 1.0);
    if (eps < best.epsilon) best = {eps, orders[k]};
  }
  // With no steps taken nothing is released.
  if (rdp.size() > 0 && rdp.isZero(0.0)) best.epsilon = 0.0;
  return best;
}

PrivacyLedger::PrivacyLedger(std::vector<double> orders)
    : orders_(std::move(orders)), rdp_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(orders_.size()))) {
  if (orders_.empty()) throw InvalidArgument("PrivacyLedger: empty order grid");
}

Eigen::VectorXd PrivacyLedger::rdp_after(double q, double sigma, std::int64_t count) const {
  if (count < 0) throw InvalidArgument("PrivacyLedger: negative step count");
  if (count == 0) return rdp_;
  return rdp_ + static_cast<double>(count) * subsampled_gaussian_rdp(q, sigma, orders_);
}

void PrivacyLedger::record(double q, double sigma, std::int64_t count) {
  check_mechanism(q, sigma);
  if (count < 0) throw InvalidArgument("PrivacyLedger: negative step count");
  if (count == 0) return;
  rdp_ = rdp_after(q, sigma, count);
  if (!records_.empty() && records_.back().sampling_rate == q && records_.back().noise_multiplier == sigma) {
    records_.back().count += count;
  } else {
    records_.push_back({q, sigma, count});
  }
  steps_ += count;
}

void PrivacyLedger::compose(const PrivacyLedger& other) {
  if (other.orders_ != orders_) throw InvalidArgument("PrivacyLedger::compose: order grids differ");
  rdp_ += other.rdp_;
  for (const auto& r : other.records_) {
    if (!records_.empty() && records_.back().sampling_rate == r.sampling_rate &&
        records_.back().noise_multiplier == r.noise_multiplier) {
      records_.back().count += r.count;
    } else {
      records_.push_back(r);
    }
  }
  steps_ += other.steps_;
}

void PrivacyLedger::write_csv(std::ostream& out, double delta) const {
  out << "step,q,sigma_noise,epsilon\n";
  out.precision(12);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(rdp_.size());
  std::int64_t step = 0;
  for (const auto& r : records_) {
    const Eigen::VectorXd per_step = subsampled_gaussian_rdp(r.sampling_rate, r.noise_multiplier, orders_);
    for (std::int64_t i = 0; i < r.count; ++i) {
      running += per_step;
      ++step;
      out << step << ',' << r.sampling_rate << ',' << r.noise_multiplier << ','
          << rdp_to_epsilon(running, orders_, delta).epsilon << '\n';
    }
  }
}

PrivacyLedger rdp_account(double q, double sigma, std::int64_t steps, const std::vector<double>& orders) {
  check_mechanism(q, sigma);
  if (steps < 0) throw InvalidArgument("rdp_account: negative step count");
  PrivacyLedger ledger(orders);
  ledger.record(q, sigma, steps);
  return ledger;
}

double calibrate_noise(double target, double delta, double q, std::int64_t steps,
                       const std::vector<double>& orders) {
  if (!(target > 0.0)) throw InvalidArgument("calibrate_noise: target epsilon must be positive");
  if (steps < 1) throw InvalidArgument("calibrate_noise: need at least one step");
  check_mechanism(q, 1.0);
  auto eps = [&](double sigma) {
    return rdp_to_epsilon(static_cast<double>(steps) * subsampled_gaussian_rdp(q, sigma, orders), orders,
                          delta)
        .epsilon;
  };
  double hi = kMaxNoiseMultiplier;
  if (eps(hi) > target) {
    std::ostringstream msg;
    msg << "calibrate_noise: epsilon " << target << " unreachable with noise multiplier <= "
        << kMaxNoiseMultiplier << " (reaches " << eps(hi) << ")";
    throw InfeasibleError(msg.str());
  }
  double lo = hi;
  while (eps(lo) <= target) {
    hi = lo;
    lo /= 2.0;
    if (lo < 1e-6) return hi;
  }
  for (int iter = 0; iter < 500 && eps(hi) < kCalibrationTolerance * target; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (eps(mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace dpsyn

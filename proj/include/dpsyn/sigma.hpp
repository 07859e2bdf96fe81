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

#ifndef DPSYN_SIGMA_HPP_
#define DPSYN_SIGMA_HPP_

#include <cmath>
#include <limits>
#include <string>

#include "dpsyn/rng.hpp"

namespace dpsyn {

// Which side of a threshold on ln(sigma) a truncated law keeps.
enum class Truncation {
  kNone,
  kLowerTail,  // ln sigma <= tau
  kUpperTail,  // ln sigma >  tau
};

// Log-normal noise-level law: ln sigma ~ Normal(p_mean, p_std^2), optionally
// conditioned on one side of a threshold.
struct SigmaDistribution {
  double p_mean = -1.2;
  double p_std = 1.2;
  Truncation truncation = Truncation::kNone;
  double tau = 0.0;

  static SigmaDistribution untruncated(double p_mean = -1.2, double p_std = 1.2) {
    return {p_mean, p_std, Truncation::kNone, 0.0};
  }
  static SigmaDistribution lower_tail(double tau, double p_mean = -1.2, double p_std = 1.2) {
    return {p_mean, p_std, Truncation::kLowerTail, tau};
  }
  static SigmaDistribution upper_tail(double tau, double p_mean = -1.2, double p_std = 1.2) {
    return {p_mean, p_std, Truncation::kUpperTail, tau};
  }

  // Truncation predicate on ln sigma.
  bool admits(double ln_sigma) const {
    switch (truncation) {
      case Truncation::kLowerTail:
        return ln_sigma <= tau;
      case Truncation::kUpperTail:
        return ln_sigma > tau;
      case Truncation::kNone:
        break;
    }
    return true;
  }

  // Probability mass of the untruncated normal that the predicate keeps.
  double kept_mass() const;

  // Throws ConfigError for p_std <= 0, non-finite thresholds or kept mass
  // below 1e-12.
  void validate() const;

  std::string describe() const;
};

// Draws ln sigma by inverting the CDF of the conditioned normal.
double sample_ln_sigma(const SigmaDistribution& dist, Rng& rng);

inline double sample_sigma(const SigmaDistribution& dist, Rng& rng) {
  return std::exp(sample_ln_sigma(dist, rng));
}

// Mean of ln sigma under the (possibly truncated) law.
double ln_sigma_mean(const SigmaDistribution& dist);

// Standard normal CDF, upper tail and their inverses, accurate in the tails.
double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);
double normal_isf(double p);

}  // namespace dpsyn

#endif  // DPSYN_SIGMA_HPP_

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

#include "dpsyn/sigma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "dpsyn/error.hpp"

namespace dpsyn {
namespace {

constexpr double kMinKeptMass = 1e-12;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_isf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_isf: p must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double SigmaDistribution::kept_mass() const {
  const double z = (tau - p_mean) / p_std;
  switch (truncation) {
    case Truncation::kLowerTail:
      return normal_cdf(z);
    case Truncation::kUpperTail:
      return normal_sf(z);
    case Truncation::kNone:
      break;
  }
  return 1.0;
}

void SigmaDistribution::validate() const {
  if (!std::isfinite(p_mean)) throw ConfigError("sigma law: P_mean must be finite");
  if (!(p_std > 0.0) || !std::isfinite(p_std)) throw ConfigError("sigma law: P_std must be positive");
  if (truncation != Truncation::kNone && !std::isfinite(tau))
    throw ConfigError("sigma law: truncation threshold must be finite");
  const double mass = kept_mass();
  if (mass < kMinKeptMass) {
    std::ostringstream msg;
    msg << "sigma law " << describe() << " keeps probability mass " << mass << " < 1e-12";
    throw ConfigError(msg.str());
  }
}

std::string SigmaDistribution::describe() const {
  std::ostringstream out;
  out << "LogNormal(" << p_mean << ", " << p_std << "^2)";
  if (truncation == Truncation::kLowerTail) out << " | ln sigma <= " << tau;
  if (truncation == Truncation::kUpperTail) out << " | ln sigma > " << tau;
  return out.str();
}

double sample_ln_sigma(const SigmaDistribution& dist, Rng& rng) {
  dist.validate();
  const double u = rng.uniform_open();
  switch (dist.truncation) {
    case Truncation::kNone:
      return dist.p_mean + dist.p_std * normal_quantile(u);
    case Truncation::kLowerTail: {
      const double bound = (dist.tau - dist.p_mean) / dist.p_std;
      double z = normal_quantile(u * normal_cdf(bound));
      z = std::min(z, bound);
      double ln_sigma = dist.p_mean + dist.p_std * z;
      if (ln_sigma > dist.tau) ln_sigma = dist.tau;
      return ln_sigma;
    }
    case Truncation::kUpperTail: {
      const double bound = (dist.tau - dist.p_mean) / dist.p_std;
      double z = normal_isf(u * normal_sf(bound));
      double ln_sigma = dist.p_mean + dist.p_std * std::max(z, bound);
      if (ln_sigma <= dist.tau) ln_sigma = std::nextafter(dist.tau, std::numeric_limits<double>::infinity());
      return ln_sigma;
    }
  }
  return dist.p_mean;
}

double ln_sigma_mean(const SigmaDistribution& dist) {
  const double z = (dist.tau - dist.p_mean) / dist.p_std;
  switch (dist.truncation) {
    case Truncation::kLowerTail:
      return dist.p_mean - dist.p_std * normal_pdf(z) / normal_cdf(z);
    case Truncation::kUpperTail:
      return dist.p_mean + dist.p_std * normal_pdf(z) / normal_sf(z);
    case Truncation::kNone:
      break;
  }
  return dist.p_mean;
}

}  // namespace dpsyn

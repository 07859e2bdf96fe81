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


#ifndef DPSYN_TESTS_SUPPORT_ORACLES_HPP_
#define DPSYN_TESTS_SUPPORT_ORACLES_HPP_

// Reference computations written independently of the library, shared by
// the unit tests and the acceptance gate.

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dpsyn::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Central differences, step scaled to the coordinate.
inline VectorXd numeric_gradient(const std::function<double(const VectorXd&)>& f, VectorXd theta) {
  VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[i]));
    const double keep = theta[i];
    theta[i] = keep + h;
    const double up = f(theta);
    theta[i] = keep - h;
    const double down = f(theta);
    theta[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const VectorXd& analytic, const VectorXd& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
}

// RDP of the Poisson-subsampled Gaussian by direct integration of
// E_{z~N(0, s^2)}[((1 - q) + q exp((2z - 1) / (2 s^2)))^alpha].
inline double quadrature_rdp(double q, double s, double alpha) {
  auto integrand = [&](double z) {
    const double log_pdf = -z * z / (2 * s * s) - std::log(s * std::sqrt(2 * M_PI));
    const double log_ratio = std::log1p(q * std::expm1((2 * z - 1) / (2 * s * s)));
    const double v = alpha * log_ratio;
    // pdf * (ratio^alpha - 1); large v goes through logs to avoid 0 * inf.
    if (v > 30.0) return std::exp(log_pdf + v + std::log1p(-std::exp(-v)));
    return std::exp(log_pdf) * std::expm1(v);
  };
  // The tilted integrand peaks near z = alpha with width s.
  const double lo = -40.0 * s;
  const double hi = std::max(0.0, alpha) + 40.0 * s + 1.0;
  const double excess =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 20, 1e-13);
  return std::log1p(excess) / (alpha - 1.0);
}

// Unbiased energy distance between the column sets a and b.
inline double energy_oracle(const MatrixXd& a, const MatrixXd& b) {
  auto mean_dist = [](const MatrixXd& u, const MatrixXd& v, bool same) {
    double total = 0.0;
    double count = 0.0;
    for (Eigen::Index i = 0; i < u.cols(); ++i)
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        if (same && i == j) continue;
        total += (u.col(i) - v.col(j)).norm();
        count += 1.0;
      }
    return total / count;
  };
  return 2 * mean_dist(a, b, false) - mean_dist(a, a, true) - mean_dist(b, b, true);
}

// Straight-line evaluation of the cleaning-stage bound.
inline double gamma_oracle(double a, double nu, double d, double expected_diff) {
  const double markov = 2.0 * (1.0 - std::sqrt(a)) / nu * expected_diff;
  const double ratio = nu * nu / (8.0 * d * (1.0 - a));
  const double chernoff = std::exp(-nu * nu / (16.0 * (1.0 - a)) + d / 2.0 - d / 2.0 * std::log(ratio));
  return markov + chernoff;
}

}  // namespace dpsyn::oracle

#endif  // DPSYN_TESTS_SUPPORT_ORACLES_HPP_

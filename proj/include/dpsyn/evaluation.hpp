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

#ifndef DPSYN_EVALUATION_HPP_
#define DPSYN_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpsyn/mlp.hpp"
#include "dpsyn/rng.hpp"

namespace dpsyn {

// Projection onto the top-k principal directions of a reference set.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;

  // columns: one flattened image per column.
  static FeatureExtractor fit(const Eigen::MatrixXd& columns, Eigen::Index k = 64);

  Eigen::MatrixXd transform(const Eigen::MatrixXd& columns) const;

  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::Index dimension() const { return basis_.cols(); }

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd mean_;
};

inline constexpr double kCovarianceRegularization = 1e-6;

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;
};

// Sample mean and (n - 1)-normalised covariance plus `ridge` on the diagonal.
GaussianFit fit_gaussian(const Eigen::MatrixXd& features, double ridge = kCovarianceRegularization);

// ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1 S2)^{1/2}). Both fits need at least
// d + 1 samples.
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

// Fits features on `reference`, then compares Gaussian fits of the two sets.
double frechet_feature_distance(const FeatureExtractor& features, const Eigen::MatrixXd& reference,
                                const Eigen::MatrixXd& generated);

enum class ClassifierKind { kLogisticRegression, kMlp, kWideMlp };
const char* to_string(ClassifierKind kind);

struct ClassifierSettings {
  int epochs = 50;
  std::size_t batch_size = 128;
  double learning_rate = 5e-4;
  // One gradient step per epoch over the whole set.
  bool full_batch = false;
};

std::vector<Eigen::Index> classifier_hidden_widths(ClassifierKind kind);

class Classifier {
 public:
  Classifier() = default;
  Classifier(ClassifierKind kind, MlpLayout layout, Eigen::VectorXd params)
      : kind_(kind), layout_(std::move(layout)), params_(std::move(params)) {}

  Eigen::MatrixXd logits(const Eigen::MatrixXd& columns) const;
  std::vector<int> predict(const Eigen::MatrixXd& columns) const;
  // Percentage of correct predictions.
  double accuracy(const Eigen::MatrixXd& columns, const std::vector<int>& labels) const;

  ClassifierKind kind() const { return kind_; }
  const MlpLayout& layout() const { return layout_; }
  const Eigen::VectorXd& params() const { return params_; }

 private:
  ClassifierKind kind_ = ClassifierKind::kLogisticRegression;
  MlpLayout layout_;
  Eigen::VectorXd params_;
};

// Mean softmax cross-entropy graph of the classifier network.
ad::Var classifier_loss(ad::Tape& tape, const MlpLayout& layout, const Eigen::VectorXd& params,
                        double* grad_sink, const Eigen::MatrixXd& columns, const std::vector<int>& labels);

Classifier train_classifier(ClassifierKind kind, const Eigen::MatrixXd& columns,
                            const std::vector<int>& labels, int num_classes,
                            const ClassifierSettings& settings, Rng& rng);

struct CasReport {
  struct Entry {
    ClassifierKind kind;
    double accuracy = 0.0;
  };
  std::vector<Entry> entries;
  // Non-empty when the generated set misses a class present in the test set.
  std::string warning;

  double accuracy(ClassifierKind kind) const;
};

// Trains each classifier kind on generated data and scores it on real test
// data.
CasReport cas(const Eigen::MatrixXd& generated, const std::vector<int>& generated_labels,
              const Eigen::MatrixXd& test, const std::vector<int>& test_labels, int num_classes,
              const std::vector<ClassifierKind>& kinds, const ClassifierSettings& settings, Rng& rng);

struct MetricsRow {
  std::string method;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  double frechet_feature_distance = 0.0;
  double cas_logreg = 0.0;
  double cas_mlp = 0.0;
};

// method,epsilon,seed,frechet_feature_distance,cas_logreg,cas_mlp
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace dpsyn

#endif  // DPSYN_EVALUATION_HPP_

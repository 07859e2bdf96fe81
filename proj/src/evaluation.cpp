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

#include "dpsyn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <Eigen/Eigenvalues>

#include "dpsyn/adam.hpp"
#include "dpsyn/error.hpp"
#include "dpsyn/gradient.hpp"

namespace dpsyn {

FeatureExtractor FeatureExtractor::fit(const Eigen::MatrixXd& columns, Eigen::Index k) {
  if (columns.cols() < 2) throw InvalidArgument("FeatureExtractor: need at least two samples");
  if (k < 1 || k > columns.rows()) throw InvalidArgument("FeatureExtractor: k must lie in [1, dimension]");
  FeatureExtractor out;
  out.mean_ = columns.rowwise().mean();
  const Eigen::MatrixXd centred = columns.colwise() - out.mean_;
  const Eigen::MatrixXd cov = centred * centred.transpose() / static_cast<double>(columns.cols() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("FeatureExtractor: eigendecomposition failed");
  // Eigenvalues come out ascending.
  out.basis_ = eig.eigenvectors().rightCols(k).rowwise().reverse();
  return out;
}

Eigen::MatrixXd FeatureExtractor::transform(const Eigen::MatrixXd& columns) const {
  if (columns.rows() != mean_.size()) throw InvalidArgument("FeatureExtractor: input dimension mismatch");
  return basis_.transpose() * (columns.colwise() - mean_);
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& features, double ridge) {
  if (features.cols() < 2) throw InvalidArgument("fit_gaussian: need at least two samples");
  GaussianFit fit;
  fit.count = static_cast<std::size_t>(features.cols());
  fit.mean = features.rowwise().mean();
  const Eigen::MatrixXd centred = features.colwise() - fit.mean;
  fit.covariance = centred * centred.transpose() / static_cast<double>(features.cols() - 1);
  fit.covariance.diagonal().array() += ridge;
  return fit;
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  const Eigen::Index d = a.mean.size();
  if (b.mean.size() != d) throw InvalidArgument("frechet_distance: dimension mismatch");
  if (a.count < static_cast<std::size_t>(d) + 1 || b.count < static_cast<std::size_t>(d) + 1)
    throw InvalidArgument("frechet_distance: need at least d + 1 samples per fit");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(a.covariance);
  const Eigen::MatrixXd sqrt_a = ea.eigenvectors() *
                                 ea.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                 ea.eigenvectors().transpose();
  Eigen::MatrixXd inner = sqrt_a * b.covariance * sqrt_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ei(inner, Eigen::EigenvaluesOnly);
  const double cross = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double value =
      (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

double frechet_feature_distance(const FeatureExtractor& features, const Eigen::MatrixXd& reference,
                                const Eigen::MatrixXd& generated) {
  return frechet_distance(fit_gaussian(features.transform(reference)),
                          fit_gaussian(features.transform(generated)));
}

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLogisticRegression: return "logreg";
    case ClassifierKind::kMlp: return "mlp";
    case ClassifierKind::kWideMlp: return "wide_mlp";
  }
  return "unknown";
}

std::vector<Eigen::Index> classifier_hidden_widths(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLogisticRegression: return {};
    case ClassifierKind::kMlp: return {128};
    case ClassifierKind::kWideMlp: return {512, 256};
  }
  return {};
}

ad::Var classifier_loss(ad::Tape& tape, const MlpLayout& layout, const Eigen::VectorXd& params,
                        double* grad_sink, const Eigen::MatrixXd& columns, const std::vector<int>& labels) {
  const ad::Var logits = mlp_forward(tape, layout, params, grad_sink, tape.constant(columns), Activation::kSilu);
  return tape.softmax_cross_entropy(logits, labels);
}

Eigen::MatrixXd Classifier::logits(const Eigen::MatrixXd& columns) const {
  if (columns.rows() != layout_.input_width()) throw InvalidArgument("Classifier: input dimension mismatch");
  ad::Tape tape;
  return tape.value(mlp_forward(tape, layout_, params_, nullptr, tape.constant(columns), Activation::kSilu));
}

std::vector<int> Classifier::predict(const Eigen::MatrixXd& columns) const {
  const Eigen::MatrixXd z = logits(columns);
  std::vector<int> out(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    Eigen::Index best = 0;
    z.col(j).maxCoeff(&best);
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

double Classifier::accuracy(const Eigen::MatrixXd& columns, const std::vector<int>& labels) const {
  if (labels.size() != static_cast<std::size_t>(columns.cols()))
    throw InvalidArgument("Classifier::accuracy: label count mismatch");
  if (labels.empty()) throw InvalidArgument("Classifier::accuracy: empty test set");
  const std::vector<int> pred = predict(columns);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += pred[i] == labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(labels.size());
}

Classifier train_classifier(ClassifierKind kind, const Eigen::MatrixXd& columns, const std::vector<int>& labels,
                            int num_classes, const ClassifierSettings& settings, Rng& rng) {
  if (columns.cols() == 0) throw InvalidArgument("train_classifier: empty training set");
  if (labels.size() != static_cast<std::size_t>(columns.cols()))
    throw InvalidArgument("train_classifier: label count mismatch");
  if (num_classes < 2) throw InvalidArgument("train_classifier: need at least two classes");
  for (int l : labels)
    if (l < 0 || l >= num_classes) throw InvalidArgument("train_classifier: label out of range");
  if (settings.epochs < 0 || settings.batch_size == 0)
    throw InvalidArgument("train_classifier: bad epoch or batch settings");
  std::vector<Eigen::Index> widths = {columns.rows()};
  for (Eigen::Index h : classifier_hidden_widths(kind)) widths.push_back(h);
  widths.push_back(num_classes);
  MlpLayout layout(widths);
  Rng init_rng = rng.split("init");
  Rng data_rng = rng.split("data");
  Eigen::VectorXd params = mlp_init(layout, init_rng, false);
  AdamState adam = AdamState::for_parameters(params.size(), settings.learning_rate);
  const auto step = [&](const Eigen::MatrixXd& x, const std::vector<int>& y) {
    const LossAndGradient lg = value_and_gradient(params.size(), [&](ad::Tape& tape, double* sink) {
      return classifier_loss(tape, layout, params, sink, x, y);
    });
    adam_step(adam, params, lg.gradient);
  };
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    if (settings.full_batch) {
      step(columns, labels);
      continue;
    }
    std::shuffle(order.begin(), order.end(), data_rng.engine());
    for (std::size_t start = 0; start < n; start += settings.batch_size) {
      const std::size_t stop = std::min(n, start + settings.batch_size);
      Eigen::MatrixXd x(columns.rows(), static_cast<Eigen::Index>(stop - start));
      std::vector<int> y(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        x.col(static_cast<Eigen::Index>(k - start)) = columns.col(static_cast<Eigen::Index>(order[k]));
        y[k - start] = labels[order[k]];
      }
      step(x, y);
    }
  }
  return Classifier(kind, std::move(layout), std::move(params));
}

double CasReport::accuracy(ClassifierKind kind) const {
  for (const auto& e : entries)
    if (e.kind == kind) return e.accuracy;
  throw InvalidArgument(std::string("CasReport: no entry for ") + to_string(kind));
}

CasReport cas(const Eigen::MatrixXd& generated, const std::vector<int>& generated_labels,
              const Eigen::MatrixXd& test, const std::vector<int>& test_labels, int num_classes,
              const std::vector<ClassifierKind>& kinds, const ClassifierSettings& settings, Rng& rng) {
  CasReport report;
  const std::set<int> have(generated_labels.begin(), generated_labels.end());
  std::vector<int> missing;
  for (int l : std::set<int>(test_labels.begin(), test_labels.end()))
    if (!have.count(l)) missing.push_back(l);
  if (!missing.empty()) {
    report.warning = "degenerate training: generated set has no examples of class";
    for (int l : missing) report.warning += " " + std::to_string(l);
  }
  for (ClassifierKind kind : kinds) {
    Rng kind_rng = rng.split(to_string(kind));
    const Classifier clf = train_classifier(kind, generated, generated_labels, num_classes, settings, kind_rng);
    report.entries.push_back({kind, clf.accuracy(test, test_labels)});
  }
  return report;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "method,epsilon,seed,frechet_feature_distance,cas_logreg,cas_mlp\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.method << ',' << r.epsilon << ',' << r.seed << ',' << r.frechet_feature_distance << ','
        << r.cas_logreg << ',' << r.cas_mlp << '\n';
}

}  // namespace dpsyn

// Copyright 2026 The qfk-lab Authors
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

/// \file ml.hpp
/// Sine-sign datasets, a soft-margin kernel SVM trained in the dual by
/// pairwise coordinate ascent, cross-validation over the C grid, and
/// misclassification scoring. sign(0) = +1 everywhere.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace qfk::ml {

struct LabeledDataset {
    std::vector<double> inputs; // 1-D inputs in [-pi, pi)
    std::vector<int> labels;    // +-1
    int w = 1;
    double b = 0.0;
    std::uint64_t seed = 0;
    std::vector<int> train_indices; // fixed 80/20 split
    std::vector<int> test_indices;
};

/// y_i = sign(sin(w x_i + b)) on uniform x in [-pi, pi); sign(0) -> +1.
LabeledDataset make_sine_dataset(int count, int w, double b,
                                 std::uint64_t seed);

struct SvmModel {
    std::vector<double> alpha; // dual coefficients in [0, C]
    std::vector<int> labels;   // training labels
    double bias = 0.0;
    double C = 1.0;
    std::vector<int> support_indices; // alpha_i > 0
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Minimize the dual -sum a + 1/2 sum a_i a_j y_i y_j K_ij subject to
/// 0 <= a_i <= C and sum y_i a_i = 0, by violating-pair updates with
/// second-order working-set selection. Throws ConvergenceError when the KKT
/// gap is still above `tol` after `max_sweeps` passes (N updates each).
SvmModel svm_train(const Eigen::MatrixXd &gram, std::span<const int> labels,
                   double C, double tol = 1e-5, int max_sweeps = 200000);

/// Decision value sum_i a_i y_i k(x_i, x) + bias for one test point.
double svm_decision(const SvmModel &model, std::span<const double> kernel_row);

/// sign of the decision value; sign(0) -> +1.
int svm_predict(const SvmModel &model, std::span<const double> kernel_row);

/// The cross-validation grid {2^t | t = -8..9}.
std::vector<double> c_grid();

struct CvResult {
    double best_c = 0.0;
    std::vector<std::pair<double, double>> scores; // (C, mean accuracy)
};

/// Stratified seeded k-fold cross-validation over the C grid; ties broken
/// toward smaller C. A degenerate single-class training fold triggers one
/// reshuffle, then a DiagnosticError.
CvResult cross_validate_c(const Eigen::MatrixXd &gram,
                          std::span<const int> labels, int folds,
                          std::uint64_t seed);

double misclassification_rate(std::span<const int> predictions,
                              std::span<const int> truth);

nlohmann::json to_json(const LabeledDataset &ds);
LabeledDataset dataset_from_json(const nlohmann::json &j);
nlohmann::json to_json(const SvmModel &model);

/// (C, mean accuracy) table as CSV text.
std::string scores_csv(const CvResult &cv);

} // namespace qfk::ml

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

#include "qfk/ml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfk/errors.hpp"
#include "qfk/rng.hpp"

namespace qfk::ml {

LabeledDataset make_sine_dataset(int count, int w, double b,
                                 std::uint64_t seed) {
    if (count < 10)
        throw ArgumentError("make_sine_dataset: need at least 10 points");
    if (w < 1)
        throw ArgumentError("make_sine_dataset: frequency must be >= 1");
    LabeledDataset ds;
    ds.w = w;
    ds.b = b;
    ds.seed = seed;
    Rng rng(seed);
    ds.inputs.reserve(count);
    ds.labels.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double x = rng.angle();
        ds.inputs.push_back(x);
        const double s = std::sin(w * x + b);
        ds.labels.push_back(s >= 0.0 ? +1 : -1);
    }
    const int train = count * 4 / 5;
    for (int i = 0; i < count; ++i)
        (i < train ? ds.train_indices : ds.test_indices).push_back(i);
    return ds;
}

SvmModel svm_train(const Eigen::MatrixXd &gram, std::span<const int> labels,
                   double C, double tol, int max_sweeps) {
    const int n = static_cast<int>(labels.size());
    if (gram.rows() != n || gram.cols() != n || n < 1)
        throw ArgumentError("svm_train: gram/label size mismatch");
    if (C <= 0.0)
        throw ArgumentError("svm_train: C must be positive");
    for (int y : labels)
        if (y != 1 && y != -1)
            throw ArgumentError("svm_train: labels must be +-1");

    std::vector<double> alpha(n, 0.0);
    std::vector<double> f(n, 0.0); // F_i = sum_j alpha_j y_j K_ij
    const double inf = std::numeric_limits<double>::infinity();
    const double tau = 1e-12;

    double gap = inf;
    int iter = 0;
    const long max_updates = static_cast<long>(max_sweeps) * n;
    long update = 0;
    for (; update < max_updates; ++update) {
        // Violating-pair selection: i maximizes -y g over I_up; j picked by
        // the second-order gain among I_low candidates below that score.
        int i = -1;
        double up = -inf, low = inf;
        for (int k = 0; k < n; ++k) {
            const double score = -labels[k] * (labels[k] * f[k] - 1.0);
            const bool in_up = (labels[k] == 1 && alpha[k] < C) ||
                               (labels[k] == -1 && alpha[k] > 0.0);
            const bool in_low = (labels[k] == -1 && alpha[k] < C) ||
                                (labels[k] == 1 && alpha[k] > 0.0);
            if (in_up && score > up) {
                up = score;
                i = k;
            }
            if (in_low && score < low)
                low = score;
        }
        gap = (i >= 0 && low < inf) ? up - low : 0.0;
        if (gap < tol)
            break;

        int j = -1;
        double best_gain = 0.0;
        for (int k = 0; k < n; ++k) {
            const bool in_low = (labels[k] == -1 && alpha[k] < C) ||
                                (labels[k] == 1 && alpha[k] > 0.0);
            if (!in_low)
                continue;
            const double score = -labels[k] * (labels[k] * f[k] - 1.0);
            const double b = up - score;
            if (b <= 0.0)
                continue;
            const double a =
                std::max(gram(i, i) + gram(k, k) - 2.0 * gram(i, k), tau);
            const double gain = b * b / a;
            if (gain > best_gain) {
                best_gain = gain;
                j = k;
            }
        }
        if (j < 0)
            break;

        const double score_j = -labels[j] * (labels[j] * f[j] - 1.0);
        const double q =
            std::max(gram(i, i) + gram(j, j) - 2.0 * gram(i, j), tau);
        double lambda = (up - score_j) / q; // unconstrained step
        // Box clipping for alpha_i += y_i*lambda, alpha_j -= y_j*lambda.
        if (labels[i] == 1)
            lambda = std::min(lambda, C - alpha[i]);
        else
            lambda = std::min(lambda, alpha[i]);
        if (labels[j] == 1)
            lambda = std::min(lambda, alpha[j]);
        else
            lambda = std::min(lambda, C - alpha[j]);
        if (lambda <= 0.0)
            break; // numerically stuck at a box corner

        alpha[i] += labels[i] * lambda;
        alpha[j] -= labels[j] * lambda;
        // d(alpha_i) y_i = lambda and d(alpha_j) y_j = -lambda.
        for (int k = 0; k < n; ++k)
            f[k] += lambda * (gram(k, i) - gram(k, j));
    }
    iter = static_cast<int>((update + n - 1) / n); // completed sweeps
    if (gap >= tol && update >= max_updates)
        throw ConvergenceError("svm_train: KKT gap " + std::to_string(gap) +
                                   " above tolerance after " +
                                   std::to_string(max_sweeps) + " sweeps",
                               gap);

    SvmModel model;
    model.alpha = alpha;
    model.labels.assign(labels.begin(), labels.end());
    model.C = C;
    model.kkt_residual = std::max(0.0, gap);
    model.iterations = iter;

    // Bias: mean over free support vectors; otherwise the midpoint of the
    // KKT interval.
    double free_sum = 0.0;
    int free_count = 0;
    double lo = -inf, hi = inf;
    const double eps = 1e-9 * C;
    for (int k = 0; k < n; ++k) {
        const double v = labels[k] - f[k];
        if (alpha[k] > eps && alpha[k] < C - eps) {
            free_sum += v;
            ++free_count;
        } else if ((alpha[k] <= eps && labels[k] == 1) ||
                   (alpha[k] >= C - eps && labels[k] == -1)) {
            lo = std::max(lo, v);
        } else {
            hi = std::min(hi, v);
        }
        if (alpha[k] > eps)
            model.support_indices.push_back(k);
    }
    if (free_count > 0)
        model.bias = free_sum / free_count;
    else if (lo > -inf && hi < inf)
        model.bias = 0.5 * (lo + hi);
    else if (lo > -inf)
        model.bias = lo;
    else if (hi < inf)
        model.bias = hi;
    else
        model.bias = 0.0;
    return model;
}

double svm_decision(const SvmModel &model,
                    std::span<const double> kernel_row) {
    if (kernel_row.size() != model.alpha.size())
        throw ArgumentError("svm_decision: kernel row length mismatch");
    double s = model.bias;
    for (std::size_t i = 0; i < model.alpha.size(); ++i)
        s += model.alpha[i] * model.labels[i] * kernel_row[i];
    return s;
}

int svm_predict(const SvmModel &model, std::span<const double> kernel_row) {
    return svm_decision(model, kernel_row) >= 0.0 ? +1 : -1;
}

std::vector<double> c_grid() {
    std::vector<double> grid;
    for (int t = -8; t <= 9; ++t)
        grid.push_back(std::pow(2.0, t));
    return grid;
}

namespace {

std::vector<int> fold_assignment(std::span<const int> labels, int folds,
                                 std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    std::vector<int> pos, neg;
    for (int i = 0; i < n; ++i)
        (labels[i] == 1 ? pos : neg).push_back(i);
    Rng rng(seed);
    auto shuffle = [&rng](std::vector<int> &v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.uniform_int(i)]);
    };
    shuffle(pos);
    shuffle(neg);
    std::vector<int> fold(n, 0);
    int next = 0;
    for (int idx : pos)
        fold[idx] = next++ % folds;
    for (int idx : neg)
        fold[idx] = next++ % folds;
    return fold;
}

bool folds_degenerate(std::span<const int> labels,
                      const std::vector<int> &fold, int folds) {
    // A fold whose training complement is single-class cannot be scored.
    for (int f = 0; f < folds; ++f) {
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < fold.size(); ++i) {
            if (fold[i] == f)
                continue;
            (labels[i] == 1 ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg)
            return true;
    }
    return false;
}

} // namespace

CvResult cross_validate_c(const Eigen::MatrixXd &gram,
                          std::span<const int> labels, int folds,
                          std::uint64_t seed) {
    const int n = static_cast<int>(labels.size());
    if (folds < 2 || n < folds)
        throw ArgumentError("cross_validate_c: need folds >= 2 and N >= folds");
    if (gram.rows() != n || gram.cols() != n)
        throw ArgumentError("cross_validate_c: gram/label size mismatch");

    std::vector<int> fold = fold_assignment(labels, folds, seed);
    if (folds_degenerate(labels, fold, folds)) {
        fold = fold_assignment(labels, folds, derive_seed(seed, 1));
        if (folds_degenerate(labels, fold, folds))
            throw DiagnosticError(
                "cross_validate_c: single-class folds persist after reshuffle");
    }

    CvResult result;
    double best_acc = -1.0;
    for (double C : c_grid()) {
        double acc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<int> train, val;
            for (int i = 0; i < n; ++i)
                (fold[i] == f ? val : train).push_back(i);
            const int tn = static_cast<int>(train.size());
            Eigen::MatrixXd sub(tn, tn);
            std::vector<int> sub_labels(tn);
            for (int a = 0; a < tn; ++a) {
                sub_labels[a] = labels[train[a]];
                for (int b = 0; b < tn; ++b)
                    sub(a, b) = gram(train[a], train[b]);
            }
            const SvmModel model = svm_train(sub, sub_labels, C);
            int correct = 0;
            std::vector<double> row(tn);
            for (int v : val) {
                for (int a = 0; a < tn; ++a)
                    row[a] = gram(v, train[a]);
                if (svm_predict(model, row) == labels[v])
                    ++correct;
            }
            acc_sum += val.empty()
                           ? 1.0
                           : static_cast<double>(correct) / val.size();
        }
        const double acc = acc_sum / folds;
        result.scores.emplace_back(C, acc);
        if (acc > best_acc) { // strict: ties keep the smaller C
            best_acc = acc;
            result.best_c = C;
        }
    }
    return result;
}

double misclassification_rate(std::span<const int> predictions,
                              std::span<const int> truth) {
    if (predictions.size() != truth.size() || truth.empty())
        throw ArgumentError("misclassification_rate: length mismatch");
    int wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predictions[i] != truth[i])
            ++wrong;
    return static_cast<double>(wrong) / truth.size();
}

nlohmann::json to_json(const LabeledDataset &ds) {
    return nlohmann::json{{"inputs", ds.inputs},
                          {"labels", ds.labels},
                          {"w", ds.w},
                          {"b", ds.b},
                          {"seed", ds.seed},
                          {"train_indices", ds.train_indices},
                          {"test_indices", ds.test_indices}};
}

LabeledDataset dataset_from_json(const nlohmann::json &j) {
    LabeledDataset ds;
    ds.inputs = j.at("inputs").get<std::vector<double>>();
    ds.labels = j.at("labels").get<std::vector<int>>();
    ds.w = j.at("w").get<int>();
    ds.b = j.at("b").get<double>();
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.train_indices = j.at("train_indices").get<std::vector<int>>();
    ds.test_indices = j.at("test_indices").get<std::vector<int>>();
    if (ds.inputs.size() != ds.labels.size())
        throw ArgumentError("dataset_from_json: inputs/labels size mismatch");
    return ds;
}

nlohmann::json to_json(const SvmModel &model) {
    return nlohmann::json{{"alpha", model.alpha},
                          {"labels", model.labels},
                          {"bias", model.bias},
                          {"C", model.C},
                          {"support_indices", model.support_indices},
                          {"kkt_residual", model.kkt_residual},
                          {"iterations", model.iterations}};
}

std::string scores_csv(const CvResult &cv) {
    std::ostringstream out;
    out.precision(17);
    out << "C,mean_accuracy\n";
    for (const auto &[c, acc] : cv.scores)
        out << c << ',' << acc << '\n';
    return out.str();
}

} // namespace qfk::ml

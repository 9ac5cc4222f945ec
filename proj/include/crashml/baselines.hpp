/*
 * Copyright 2026 The crashml Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "crashml/core.hpp"
#include "crashml/encode.hpp"

namespace crashml {

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    double l2 = 0.0;

    double predict_margin(std::span<const double> x) const {
        if (x.size() != weights.size()) throw DataError("logistic: feature count mismatch");
        double m = bias;
        for (std::size_t j = 0; j < x.size(); ++j) m += weights[j] * x[j];
        return m;
    }

    double predict_proba(std::span<const double> x) const { return sigmoid(predict_margin(x)); }

    std::vector<double> predict_probas(const Matrix& x) const {
        std::vector<double> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_proba(x.row(i));
        return out;
    }
};

namespace baseline_detail {

inline double logistic_objective(const Matrix& x, const std::vector<int>& y,
                                 const std::vector<double>& w, double b, double l2) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double m = b;
        const auto row = x.row(i);
        for (std::size_t j = 0; j < w.size(); ++j) m += w[j] * row[j];
        loss += log_loss_term(y[i], sigmoid(m));
    }
    loss /= static_cast<double>(x.rows());
    double reg = 0.0;
    for (double wj : w) reg += wj * wj;
    return loss + 0.5 * l2 * reg;
}

}  // namespace baseline_detail

// Full-batch gradient descent on L2-regularized mean logistic loss (bias
// unpenalized). A step that would increase the objective is retried at half
// the length, so the objective is non-increasing across epochs.
inline LogisticModel fit_logistic(const EncodedMatrix& train, double l2 = 1e-4,
                                  std::size_t epochs = 500, double step = 1.0) {
    if (train.n() == 0 || train.p() == 0) throw TrainError("fit_logistic: empty training matrix");
    if (train.count_class(0) == 0 || train.count_class(1) == 0) {
        throw TrainError("fit_logistic: both classes must be present");
    }
    if (l2 < 0.0 || step <= 0.0 || epochs < 1) throw ConfigError("fit_logistic: bad parameters");

    const std::size_t n = train.n(), p = train.p();
    LogisticModel model;
    model.weights.assign(p, 0.0);
    model.l2 = l2;

    std::vector<double> grad_w(p);
    double objective =
        baseline_detail::logistic_objective(train.x, train.y, model.weights, model.bias, l2);

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = train.x.row(i);
            double m = model.bias;
            for (std::size_t j = 0; j < p; ++j) m += model.weights[j] * row[j];
            const double err = sigmoid(m) - static_cast<double>(train.y[i]);
            for (std::size_t j = 0; j < p; ++j) grad_w[j] += err * row[j];
            grad_b += err;
        }
        for (std::size_t j = 0; j < p; ++j) {
            grad_w[j] = grad_w[j] / static_cast<double>(n) + l2 * model.weights[j];
        }
        grad_b /= static_cast<double>(n);

        std::vector<double> w_next(p);
        double trial = step;
        for (int backtrack = 0; backtrack < 60; ++backtrack) {
            for (std::size_t j = 0; j < p; ++j) w_next[j] = model.weights[j] - trial * grad_w[j];
            const double b_next = model.bias - trial * grad_b;
            const double obj_next =
                baseline_detail::logistic_objective(train.x, train.y, w_next, b_next, l2);
            if (obj_next <= objective) {
                model.weights = w_next;
                model.bias = b_next;
                objective = obj_next;
                break;
            }
            trial *= 0.5;
        }
    }
    return model;
}

struct GaussianNbModel {
    double prior[2] = {0.5, 0.5};
    std::vector<double> mean[2];      // per class, per feature
    std::vector<double> variance[2];  // floored

    double log_joint(int cls, std::span<const double> x) const {
        constexpr double kLog2Pi = 1.8378770664093453;
        double lj = std::log(prior[cls]);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double var = variance[cls][j];
            const double d = x[j] - mean[cls][j];
            lj += -0.5 * (kLog2Pi + std::log(var) + d * d / var);
        }
        return lj;
    }

    // Posterior probability of class 1.
    double predict_proba(std::span<const double> x) const {
        if (x.size() != mean[0].size()) throw DataError("gnb: feature count mismatch");
        const double l0 = log_joint(0, x), l1 = log_joint(1, x);
        const double hi = std::max(l0, l1);
        const double e0 = std::exp(l0 - hi), e1 = std::exp(l1 - hi);
        return e1 / (e0 + e1);
    }

    std::vector<double> predict_probas(const Matrix& x) const {
        std::vector<double> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_proba(x.row(i));
        return out;
    }
};

// Closed-form Gaussian class-conditional fit with a variance floor.
inline GaussianNbModel fit_gnb(const EncodedMatrix& train, double variance_floor = 1e-9) {
    if (train.n() == 0 || train.p() == 0) throw TrainError("fit_gnb: empty training matrix");
    const std::size_t n0 = train.count_class(0), n1 = train.count_class(1);
    if (n0 == 0 || n1 == 0) throw TrainError("fit_gnb: both classes must be present");

    GaussianNbModel model;
    const std::size_t counts[2] = {n0, n1};
    model.prior[0] = static_cast<double>(n0) / static_cast<double>(train.n());
    model.prior[1] = static_cast<double>(n1) / static_cast<double>(train.n());
    for (int c = 0; c < 2; ++c) {
        model.mean[c].assign(train.p(), 0.0);
        model.variance[c].assign(train.p(), 0.0);
    }
    for (std::size_t i = 0; i < train.n(); ++i) {
        const int c = train.y[i];
        for (std::size_t j = 0; j < train.p(); ++j) model.mean[c][j] += train.x(i, j);
    }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < train.p(); ++j) {
            model.mean[c][j] /= static_cast<double>(counts[c]);
        }
    }
    for (std::size_t i = 0; i < train.n(); ++i) {
        const int c = train.y[i];
        for (std::size_t j = 0; j < train.p(); ++j) {
            const double d = train.x(i, j) - model.mean[c][j];
            model.variance[c][j] += d * d;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < train.p(); ++j) {
            model.variance[c][j] =
                std::max(model.variance[c][j] / static_cast<double>(counts[c]), variance_floor);
        }
    }
    return model;
}

}  // namespace crashml

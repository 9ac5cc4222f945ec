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

#include <cstddef>
#include <string>
#include <vector>

#include "crashml/core.hpp"
#include "crashml/encode.hpp"
#include "crashml/gbdt.hpp"
#include "crashml/kfold.hpp"
#include "crashml/metrics.hpp"
#include "crashml/smote.hpp"

namespace crashml {

// Scores probability predictions under a named metric.
inline double score_metric(const std::string& metric, const std::vector<int>& y_true,
                           const std::vector<double>& probs) {
    if (metric == "roc_auc") return roc_auc(y_true, probs);
    std::vector<int> labels(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = probs[i] >= 0.5 ? 1 : 0;
    const ClassificationReport rep = classification_report(y_true, labels);
    if (metric == "accuracy") return rep.accuracy;
    if (metric == "f1") return rep.positive.f1.value;
    if (metric == "macro_f1") return rep.macro_f1;
    throw ConfigError("unknown metric '" + metric + "'");
}

template <typename Config>
struct GridSearchResult {
    Config best;
    std::size_t best_index = 0;
    std::vector<double> mean_scores;               // one per grid entry
    std::vector<std::vector<double>> fold_scores;  // [grid entry][fold]
};

// Stratified k-fold cross-validation over a config grid. Every config sees
// identical folds; the winner maximizes the mean validation score, with ties
// going to the earlier grid position.
template <typename Config, typename FitScore>
GridSearchResult<Config> grid_search_cv(const EncodedMatrix& train,
                                        const std::vector<Config>& grid, std::size_t k,
                                        std::uint64_t seed, FitScore&& fit_score) {
    if (grid.empty()) throw ConfigError("grid_search: empty grid");
    if (k < 2) throw ConfigError("grid_search: k must be at least 2");

    const KFoldSplit folds = stratified_kfold(train.y, k, seed);

    GridSearchResult<Config> result;
    result.fold_scores.assign(grid.size(), {});
    result.mean_scores.assign(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t f = 0; f < k; ++f) {
            const EncodedMatrix fold_train =
                subset_rows(train, folds.train_of(f, train.n()));
            const EncodedMatrix fold_valid = subset_rows(train, folds.test_indices[f]);
            result.fold_scores[g].push_back(fit_score(grid[g], fold_train, fold_valid));
        }
        result.mean_scores[g] = mean(result.fold_scores[g]);
    }

    result.best_index = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (result.mean_scores[g] > result.mean_scores[result.best_index]) result.best_index = g;
    }
    result.best = grid[result.best_index];
    return result;
}

struct CvScores {
    std::vector<double> fold_scores;
    double mean_score = 0.0;
    double std_score = 0.0;  // sample standard deviation
};

// Cross-validated scoring of a single model recipe. fit_predict receives the
// fold-train partition (oversampled when configured) and the fold-validation
// matrix and returns validation probabilities.
template <typename FitPredict>
CvScores cross_val_score(const EncodedMatrix& train, const KFoldSplit& plan,
                         const std::string& metric, FitPredict&& fit_predict,
                         const SmoteConfig* oversample = nullptr) {
    CvScores cv;
    for (std::size_t f = 0; f < plan.k(); ++f) {
        EncodedMatrix fold_train = subset_rows(train, plan.train_of(f, train.n()));
        const EncodedMatrix fold_valid = subset_rows(train, plan.test_indices[f]);
        if (oversample) {
            SmoteConfig sc = *oversample;
            sc.seed = Rng::mix(sc.seed, f);
            fold_train = smote_oversample(fold_train, sc);
        }
        const std::vector<double> probs = fit_predict(fold_train, fold_valid);
        cv.fold_scores.push_back(score_metric(metric, fold_valid.y, probs));
    }
    cv.mean_score = mean(cv.fold_scores);
    cv.std_score = cv.fold_scores.size() > 1 ? sample_std(cv.fold_scores) : 0.0;
    return cv;
}

inline GridSearchResult<GbdtConfig> grid_search_gbdt(const EncodedMatrix& train,
                                                     const std::vector<GbdtConfig>& grid,
                                                     std::size_t k, const std::string& metric,
                                                     std::uint64_t seed) {
    score_metric(metric, {0, 1}, {0.25, 0.75});  // validate the metric name up front
    return grid_search_cv(train, grid, k, seed,
                          [&](const GbdtConfig& cfg, const EncodedMatrix& fold_train,
                              const EncodedMatrix& fold_valid) {
                              const GbdtModel model = fit_gbdt(fold_train, cfg);
                              return score_metric(metric, fold_valid.y,
                                                  model.predict_probas(fold_valid.x));
                          });
}

}  // namespace crashml

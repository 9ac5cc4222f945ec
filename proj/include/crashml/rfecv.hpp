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

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashml/core.hpp"
#include "crashml/csv.hpp"
#include "crashml/encode.hpp"
#include "crashml/explain.hpp"
#include "crashml/gbdt.hpp"
#include "crashml/kfold.hpp"
#include "crashml/metrics.hpp"
#include "crashml/smote.hpp"

namespace crashml {

struct ElimStep {
    std::size_t feature_count = 0;
    std::vector<std::string> retained;    // evaluated feature set at this step
    std::vector<std::string> eliminated;  // removed after this step's evaluation
    std::vector<double> fold_auc;         // validation ROC-AUC per fold
    double mean_auc = 0.0;
    double std_auc = 0.0;                 // sample standard deviation across folds
    std::vector<double> mean_abs_shap;    // per retained feature, fold-averaged
};

struct ElimReport {
    std::vector<ElimStep> steps;
    std::size_t best_count = 0;
    std::vector<std::string> best_features;
};

// Recursive feature elimination steered by held-out attribution magnitudes:
// each step cross-validates the current feature set, averages per-feature
// mean |SHAP| over validation rows across folds, and drops the weakest
// features. Validation ROC-AUC is recorded at every step; best_count is the
// count with the highest mean (ties prefer fewer features). Oversampling, if
// configured, touches only the fold-train partitions.
inline ElimReport shap_rfecv(const EncodedMatrix& train, const GbdtConfig& cfg, std::size_t k,
                             std::size_t step, std::size_t min_features, std::uint64_t seed,
                             const SmoteConfig* oversample = nullptr) {
    cfg.validate();
    if (k < 2) throw ConfigError("shap_rfecv: k must be at least 2");
    if (step < 1) throw ConfigError("shap_rfecv: step must be at least 1");
    if (min_features < 1 || min_features > train.p()) {
        throw ConfigError("shap_rfecv: min_features must lie in [1, p]");
    }

    std::vector<std::size_t> current(train.p());  // original feature indices
    std::iota(current.begin(), current.end(), std::size_t{0});

    ElimReport report;
    double best_mean = -1.0;

    for (std::size_t round = 0;; ++round) {
        const EncodedMatrix sub = subset_columns(train, current);
        const KFoldSplit folds = stratified_kfold(sub.y, k, Rng::mix(seed, round));

        ElimStep st;
        st.feature_count = current.size();
        st.retained = sub.feature_names;
        st.mean_abs_shap.assign(current.size(), 0.0);

        for (std::size_t f = 0; f < k; ++f) {
            EncodedMatrix fold_train = subset_rows(sub, folds.train_of(f, sub.n()));
            const EncodedMatrix fold_valid = subset_rows(sub, folds.test_indices[f]);
            if (oversample) {
                SmoteConfig sc = *oversample;
                sc.seed = Rng::mix(sc.seed, Rng::mix(round, f));
                fold_train = smote_oversample(fold_train, sc);
            }
            const GbdtModel model = fit_gbdt(fold_train, cfg);
            st.fold_auc.push_back(roc_auc(fold_valid.y, model.predict_probas(fold_valid.x)));
            for (std::size_t i = 0; i < fold_valid.n(); ++i) {
                const std::vector<double> phi = tree_shap(model, fold_valid.x.row(i));
                for (std::size_t j = 0; j < current.size(); ++j) {
                    st.mean_abs_shap[j] += std::abs(phi[j]) / static_cast<double>(fold_valid.n());
                }
            }
        }
        for (double& v : st.mean_abs_shap) v /= static_cast<double>(k);
        st.mean_auc = mean(st.fold_auc);
        st.std_auc = st.fold_auc.size() > 1 ? sample_std(st.fold_auc) : 0.0;

        const bool better = st.mean_auc > best_mean ||
                            (st.mean_auc == best_mean && st.feature_count < report.best_count);
        if (better || report.steps.empty()) {
            best_mean = st.mean_auc;
            report.best_count = st.feature_count;
            report.best_features = st.retained;
        }

        if (current.size() <= min_features) {
            report.steps.push_back(std::move(st));
            break;
        }

        // Rank current features ascending by averaged importance; equal
        // importance drops the higher original index first.
        const std::size_t n_drop = std::min(step, current.size() - min_features);
        std::vector<std::size_t> order(current.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (st.mean_abs_shap[a] != st.mean_abs_shap[b]) {
                return st.mean_abs_shap[a] < st.mean_abs_shap[b];
            }
            return current[a] > current[b];
        });
        std::vector<bool> drop(current.size(), false);
        for (std::size_t d = 0; d < n_drop; ++d) {
            drop[order[d]] = true;
            st.eliminated.push_back(sub.feature_names[order[d]]);
        }
        std::vector<std::size_t> next;
        for (std::size_t j = 0; j < current.size(); ++j) {
            if (!drop[j]) next.push_back(current[j]);
        }
        report.steps.push_back(std::move(st));
        current = std::move(next);
    }
    return report;
}

inline nlohmann::ordered_json elim_report_to_json(const ElimReport& report) {
    nlohmann::ordered_json j;
    j["best_count"] = report.best_count;
    j["best_features"] = report.best_features;
    j["steps"] = nlohmann::ordered_json::array();
    for (const ElimStep& st : report.steps) {
        nlohmann::ordered_json sj;
        sj["feature_count"] = st.feature_count;
        sj["mean_auc"] = st.mean_auc;
        sj["std_auc"] = st.std_auc;
        sj["fold_auc"] = st.fold_auc;
        sj["retained"] = st.retained;
        sj["eliminated"] = st.eliminated;
        sj["mean_abs_shap"] = st.mean_abs_shap;
        j["steps"].push_back(std::move(sj));
    }
    return j;
}

inline std::string elim_report_csv(const ElimReport& report) {
    std::string out = "feature_count,mean_auc,std_auc,eliminated\n";
    for (const ElimStep& st : report.steps) {
        std::string elim;
        for (std::size_t i = 0; i < st.eliminated.size(); ++i) {
            if (i) elim += ";";
            elim += st.eliminated[i];
        }
        out += std::to_string(st.feature_count) + "," + csv_format_number(st.mean_auc) + "," +
               csv_format_number(st.std_auc) + "," + csv_quote_field(elim) + "\n";
    }
    return out;
}

}  // namespace crashml

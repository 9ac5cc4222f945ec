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
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "crashml/core.hpp"

namespace crashml {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

inline ConfusionCounts confusion_counts(const std::vector<int>& y_true,
                                        const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw DataError("confusion_counts: label vectors must be non-empty and equal length");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 0 && y_true[i] != 1) throw DataError("confusion_counts: labels must be 0/1");
        if (y_pred[i] != 0 && y_pred[i] != 1) throw DataError("confusion_counts: labels must be 0/1");
        if (y_true[i] == 1) {
            (y_pred[i] == 1 ? c.tp : c.fn) += 1;
        } else {
            (y_pred[i] == 1 ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

// A ratio whose denominator may be empty. Undefined ratios report 0 but keep
// the flag so callers can distinguish "perfectly wrong" from "no support".
struct Ratio {
    double value = 0.0;
    bool defined = false;

    static Ratio of(double num, double den) {
        Ratio r;
        if (den > 0.0) {
            r.value = num / den;
            r.defined = true;
        }
        return r;
    }
};

struct ClassReport {
    Ratio precision, recall, f1;
};

inline ClassReport class_report(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassReport r;
    r.precision = Ratio::of(static_cast<double>(tp), static_cast<double>(tp + fp));
    r.recall = Ratio::of(static_cast<double>(tp), static_cast<double>(tp + fn));
    r.f1 = Ratio::of(2.0 * r.precision.value * r.recall.value,
                     r.precision.value + r.recall.value);
    return r;
}

struct ClassificationReport {
    ConfusionCounts counts;  // positive class = 1
    double accuracy = 0.0;
    ClassReport positive, negative;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
};

inline ClassificationReport classification_report(const std::vector<int>& y_true,
                                                  const std::vector<int>& y_pred) {
    ClassificationReport rep;
    rep.counts = confusion_counts(y_true, y_pred);
    const ConfusionCounts& c = rep.counts;
    rep.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    rep.positive = class_report(c.tp, c.fp, c.fn);
    rep.negative = class_report(c.tn, c.fn, c.fp);
    rep.macro_precision = 0.5 * (rep.positive.precision.value + rep.negative.precision.value);
    rep.macro_recall = 0.5 * (rep.positive.recall.value + rep.negative.recall.value);
    rep.macro_f1 = 0.5 * (rep.positive.f1.value + rep.negative.f1.value);
    return rep;
}

// Rank-statistic AUC: the probability a random positive outscores a random
// negative, ties counted half. Computed from average ranks, so tied score
// groups need no special casing.
inline double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size() || y_true.empty()) {
        throw DataError("roc_auc: labels and scores must be non-empty and equal length");
    }
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 0 && y_true[i] != 1) throw DataError("roc_auc: labels must be 0/1");
        if (!std::isfinite(scores[i])) throw DataError("roc_auc: scores must be finite");
        n_pos += static_cast<std::size_t>(y_true[i]);
    }
    const std::size_t n = y_true.size(), n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t) {
            if (y_true[order[t]] == 1) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct RocCurve {
    std::vector<double> thresholds;  // descending; one per distinct score
    std::vector<double> fpr, tpr;    // same length as thresholds, plus leading (0, 0)
};

// ROC points swept from the strictest threshold to the loosest. Point k gives
// the rates when every score >= thresholds[k-1] is called positive; the curve
// starts at (0, 0) and ends at (1, 1).
inline RocCurve roc_curve(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size() || y_true.empty()) {
        throw DataError("roc_curve: labels and scores must be non-empty and equal length");
    }
    std::size_t n_pos = 0;
    for (int v : y_true) {
        if (v != 0 && v != 1) throw DataError("roc_curve: labels must be 0/1");
        n_pos += static_cast<std::size_t>(v);
    }
    const std::size_t n = y_true.size(), n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("roc_curve: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t) {
            (y_true[order[t]] == 1 ? tp : fp) += 1;
        }
        curve.thresholds.push_back(scores[order[i]]);
        curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
        curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
        i = j;
    }
    return curve;
}

inline double auc_trapezoid(const RocCurve& curve) {
    double a = 0.0;
    for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
        a += (curve.fpr[i] - curve.fpr[i - 1]) * 0.5 * (curve.tpr[i] + curve.tpr[i - 1]);
    }
    return a;
}

inline double log_loss(const std::vector<int>& y_true, const std::vector<double>& probs) {
    if (y_true.size() != probs.size() || y_true.empty()) {
        throw DataError("log_loss: labels and probabilities must be non-empty and equal length");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 0 && y_true[i] != 1) throw DataError("log_loss: labels must be 0/1");
        if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
            throw DataError("log_loss: probabilities must lie in [0, 1]");
        }
        s += log_loss_term(y_true[i], probs[i]);
    }
    return s / static_cast<double>(y_true.size());
}

// Full evaluation of probability scores at a hard-label threshold. AUC and
// the ROC curve are filled only by full_metrics (they need both classes).
struct MetricsReport {
    double threshold = 0.5;
    ClassificationReport report;
    bool has_auc = false;
    double auc = 0.0;
    RocCurve curve;
};

inline MetricsReport confusion_and_rates(const std::vector<int>& y_true,
                                         const std::vector<double>& scores, double threshold) {
    if (y_true.size() != scores.size() || y_true.empty()) {
        throw DataError("confusion_and_rates: labels and scores must be non-empty, equal length");
    }
    MetricsReport mr;
    mr.threshold = threshold;
    std::vector<int> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= threshold ? 1 : 0;
    mr.report = classification_report(y_true, labels);
    return mr;
}

inline MetricsReport full_metrics(const std::vector<int>& y_true,
                                  const std::vector<double>& scores, double threshold = 0.5) {
    MetricsReport mr = confusion_and_rates(y_true, scores, threshold);
    mr.auc = roc_auc(y_true, scores);
    mr.curve = roc_curve(y_true, scores);
    mr.has_auc = true;
    return mr;
}

inline nlohmann::ordered_json ratio_to_json(const Ratio& r) {
    nlohmann::ordered_json j;
    j["value"] = r.value;
    j["defined"] = r.defined;
    return j;
}

inline nlohmann::ordered_json report_to_json(const ClassificationReport& rep) {
    nlohmann::ordered_json j;
    j["n"] = rep.counts.total();
    j["confusion"] = {{"tp", rep.counts.tp},
                      {"fp", rep.counts.fp},
                      {"tn", rep.counts.tn},
                      {"fn", rep.counts.fn}};
    j["accuracy"] = rep.accuracy;
    j["positive"] = {{"precision", ratio_to_json(rep.positive.precision)},
                     {"recall", ratio_to_json(rep.positive.recall)},
                     {"f1", ratio_to_json(rep.positive.f1)}};
    j["negative"] = {{"precision", ratio_to_json(rep.negative.precision)},
                     {"recall", ratio_to_json(rep.negative.recall)},
                     {"f1", ratio_to_json(rep.negative.f1)}};
    j["macro"] = {{"precision", rep.macro_precision},
                  {"recall", rep.macro_recall},
                  {"f1", rep.macro_f1}};
    return j;
}

inline nlohmann::ordered_json metrics_report_to_json(const MetricsReport& mr) {
    nlohmann::ordered_json j = report_to_json(mr.report);
    j["threshold"] = mr.threshold;
    if (mr.has_auc) j["roc_auc"] = mr.auc;
    return j;
}

inline std::string roc_curve_csv(const RocCurve& curve) {
    std::string out = "fpr,tpr,threshold\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,\n", curve.fpr[0], curve.tpr[0]);
    out += buf;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", curve.fpr[i + 1], curve.tpr[i + 1],
                      curve.thresholds[i]);
        out += buf;
    }
    return out;
}

}  // namespace crashml

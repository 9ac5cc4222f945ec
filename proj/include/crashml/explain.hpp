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
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashml/core.hpp"
#include "crashml/csv.hpp"
#include "crashml/gbdt.hpp"
#include "crashml/shap.hpp"

namespace crashml {

// Attributions for a set of instances, in log-odds units: for every row,
// base_value + sum_j shap(i,j) equals the row's margin.
struct Explanation {
    double base_value = 0.0;
    std::vector<std::string> feature_names;
    Matrix x;     // explained instances, scaled values
    Matrix shap;  // n x p attributions
    std::vector<double> margins;

    std::size_t n() const { return shap.rows(); }
    std::size_t p() const { return feature_names.size(); }
};

inline Explanation explain_set(const GbdtModel& model, const Matrix& xs) {
    Explanation expl;
    expl.feature_names = model.feature_names;
    expl.base_value = expected_margin(model);
    expl.x = xs;
    expl.shap = Matrix(xs.rows(), model.n_features());
    expl.margins.resize(xs.rows());
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        const std::vector<double> phi = tree_shap(model, xs.row(i));
        std::copy(phi.begin(), phi.end(), expl.shap.row(i).begin());
        expl.margins[i] = model.predict_margin(xs.row(i));
        double total = expl.base_value;
        for (double v : phi) total += v;
        if (std::abs(total - expl.margins[i]) > 1e-6) {
            throw ExplainError("explain_set: attribution for row " + std::to_string(i) +
                               " does not reproduce the margin (|" + std::to_string(total) + " - " +
                               std::to_string(expl.margins[i]) + "| > 1e-6)");
        }
    }
    return expl;
}

// Features ranked by mean absolute attribution, descending; ties keep the
// lower feature index first.
inline std::vector<std::pair<std::string, double>> global_importance(const Explanation& expl) {
    if (expl.n() == 0) throw DataError("global_importance: no explained rows");
    std::vector<double> mean_abs(expl.p(), 0.0);
    for (std::size_t i = 0; i < expl.n(); ++i) {
        for (std::size_t j = 0; j < expl.p(); ++j) mean_abs[j] += std::abs(expl.shap(i, j));
    }
    std::vector<std::size_t> order(expl.p());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j : order) {
        out.emplace_back(expl.feature_names[j], mean_abs[j] / static_cast<double>(expl.n()));
    }
    return out;
}

struct DependencePoint {
    double x_value = 0.0;
    double shap_value = 0.0;
    double interaction_value = 0.0;
};

struct DependenceData {
    std::size_t feature_index = 0;
    int interaction_feature_index = -1;  // -1 when too few rows to select one
    std::vector<DependencePoint> points;
};

namespace explain_detail {

// Nearest-rank quartile group of each value: 0..3.
inline std::vector<int> quartile_groups(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    auto q = [&](double frac) {
        const auto r = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n)));
        return sorted[std::max<std::size_t>(r, 1) - 1];
    };
    const double q1 = q(0.25), q2 = q(0.5), q3 = q(0.75);
    std::vector<int> group(n);
    for (std::size_t i = 0; i < n; ++i) {
        group[i] = values[i] <= q1 ? 0 : values[i] <= q2 ? 1 : values[i] <= q3 ? 2 : 3;
    }
    return group;
}

// Least-squares residuals of y against x (the main-effect trend).
inline std::vector<double> detrend(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = my - slope * mx;
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = y[i] - (intercept + slope * x[i]);
    (void)n;
    return r;
}

// Variance across the nonempty quartile-group means of r.
inline double interaction_score(const std::vector<int>& groups, const std::vector<double>& r) {
    double sums[4] = {0, 0, 0, 0};
    std::size_t counts[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < groups.size(); ++i) {
        sums[groups[i]] += r[i];
        counts[groups[i]] += 1;
    }
    std::vector<double> means;
    for (int g = 0; g < 4; ++g) {
        if (counts[g] > 0) means.push_back(sums[g] / static_cast<double>(counts[g]));
    }
    if (means.size() < 2) return 0.0;
    const double m = mean(means);
    double v = 0.0;
    for (double gm : means) v += (gm - m) * (gm - m);
    return v / static_cast<double>(means.size());
}

}  // namespace explain_detail

// Scatter data for one feature's attribution, colored by the interacting
// feature: the candidate whose quartile groups best separate the de-trended
// attribution values (highest variance of group means). Needs at least 10
// rows to attempt selection; below that the interaction index stays -1.
inline DependenceData dependence_data(const Explanation& expl, std::size_t feature) {
    if (feature >= expl.p()) throw DataError("dependence_data: feature index out of range");
    if (expl.n() == 0) throw DataError("dependence_data: no explained rows");

    DependenceData dep;
    dep.feature_index = feature;

    std::vector<double> xf(expl.n()), phi(expl.n());
    for (std::size_t i = 0; i < expl.n(); ++i) {
        xf[i] = expl.x(i, feature);
        phi[i] = expl.shap(i, feature);
    }

    if (expl.n() >= 10 && expl.p() >= 2) {
        const std::vector<double> resid = explain_detail::detrend(xf, phi);
        double best_score = -1.0;
        std::size_t best_j = feature;
        std::vector<double> xj(expl.n());
        for (std::size_t j = 0; j < expl.p(); ++j) {
            if (j == feature) continue;
            for (std::size_t i = 0; i < expl.n(); ++i) xj[i] = expl.x(i, j);
            const double score =
                explain_detail::interaction_score(explain_detail::quartile_groups(xj), resid);
            if (score > best_score) {
                best_score = score;
                best_j = j;
            }
        }
        dep.interaction_feature_index = static_cast<int>(best_j);
    }

    dep.points.resize(expl.n());
    for (std::size_t i = 0; i < expl.n(); ++i) {
        dep.points[i].x_value = xf[i];
        dep.points[i].shap_value = phi[i];
        dep.points[i].interaction_value =
            dep.interaction_feature_index >= 0
                ? expl.x(i, static_cast<std::size_t>(dep.interaction_feature_index))
                : 0.0;
    }
    return dep;
}

struct ForceTerm {
    std::string feature;
    double x_value = 0.0;
    double phi = 0.0;
};

// One instance's additive story: the top_k strongest attributions listed
// individually (by |phi|, descending), the rest folded into other_phi, so
// base_value + listed + other_phi = margin.
struct ForceDecomposition {
    double base_value = 0.0;
    double margin = 0.0;
    std::vector<ForceTerm> top;
    double other_phi = 0.0;
    std::size_t other_count = 0;
};

inline ForceDecomposition force_decomposition(const Explanation& expl, std::size_t row,
                                              std::size_t top_k) {
    if (row >= expl.n()) throw DataError("force_decomposition: row index out of range");
    ForceDecomposition fd;
    fd.base_value = expl.base_value;
    fd.margin = expl.margins[row];

    std::vector<std::size_t> order(expl.p());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(expl.shap(row, a)) > std::abs(expl.shap(row, b));
    });
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::size_t j = order[r];
        if (r < top_k) {
            fd.top.push_back({expl.feature_names[j], expl.x(row, j), expl.shap(row, j)});
        } else {
            fd.other_phi += expl.shap(row, j);
            fd.other_count += 1;
        }
    }
    return fd;
}

// --- exports ------------------------------------------------------------

inline nlohmann::ordered_json explanation_to_json(const Explanation& expl) {
    nlohmann::ordered_json j;
    j["base_value"] = expl.base_value;
    j["feature_names"] = expl.feature_names;
    j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < expl.n(); ++i) {
        nlohmann::ordered_json row;
        row["x"] = std::vector<double>(expl.x.row(i).begin(), expl.x.row(i).end());
        row["shap"] = std::vector<double>(expl.shap.row(i).begin(), expl.shap.row(i).end());
        row["margin"] = expl.margins[i];
        j["rows"].push_back(std::move(row));
    }
    return j;
}

inline std::string global_importance_csv(const std::vector<std::pair<std::string, double>>& imp) {
    std::string out = "feature,mean_abs_shap\n";
    for (const auto& [name, value] : imp) {
        out += csv_quote_field(name) + "," + csv_format_number(value) + "\n";
    }
    return out;
}

inline std::string dependence_csv(const DependenceData& dep, const Explanation& expl) {
    const std::string fname = expl.feature_names[dep.feature_index];
    const std::string iname = dep.interaction_feature_index >= 0
                                  ? expl.feature_names[static_cast<std::size_t>(
                                        dep.interaction_feature_index)]
                                  : "";
    std::string out = "x,shap,interaction_x\n";
    out.insert(0, "# feature=" + fname + " interaction=" + iname + "\n");
    for (const DependencePoint& pt : dep.points) {
        out += csv_format_number(pt.x_value) + "," + csv_format_number(pt.shap_value) + "," +
               csv_format_number(pt.interaction_value) + "\n";
    }
    return out;
}

inline nlohmann::ordered_json force_to_json(const ForceDecomposition& fd) {
    nlohmann::ordered_json j;
    j["base_value"] = fd.base_value;
    j["margin"] = fd.margin;
    j["terms"] = nlohmann::ordered_json::array();
    for (const ForceTerm& t : fd.top) {
        j["terms"].push_back({{"feature", t.feature}, {"x", t.x_value}, {"phi", t.phi}});
    }
    j["other_phi"] = fd.other_phi;
    j["other_count"] = fd.other_count;
    return j;
}

// Per-point beeswarm data for the top_k globally important features: feature
// rank (0 = most important), attribution, and the instance's feature value
// normalized to [0, 1] within the explained set (for coloring).
inline nlohmann::ordered_json beeswarm_json(const Explanation& expl, std::size_t top_k) {
    const auto imp = global_importance(expl);
    nlohmann::ordered_json j;
    j["features"] = nlohmann::ordered_json::array();
    const std::size_t k = std::min(top_k, imp.size());
    for (std::size_t r = 0; r < k; ++r) {
        const auto it = std::find(expl.feature_names.begin(), expl.feature_names.end(),
                                  imp[r].first);
        const auto fj = static_cast<std::size_t>(it - expl.feature_names.begin());
        double lo = expl.x(0, fj), hi = expl.x(0, fj);
        for (std::size_t i = 1; i < expl.n(); ++i) {
            lo = std::min(lo, expl.x(i, fj));
            hi = std::max(hi, expl.x(i, fj));
        }
        nlohmann::ordered_json fobj;
        fobj["rank"] = r;
        fobj["feature"] = imp[r].first;
        fobj["mean_abs_shap"] = imp[r].second;
        fobj["points"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < expl.n(); ++i) {
            const double norm = hi > lo ? (expl.x(i, fj) - lo) / (hi - lo) : 0.5;
            fobj["points"].push_back({{"shap", expl.shap(i, fj)}, {"color", norm}});
        }
        j["features"].push_back(std::move(fobj));
    }
    return j;
}

// Heatmap export: instances ordered by ascending margin, one attribution row
// per instance, features in global-importance order.
inline nlohmann::ordered_json heatmap_json(const Explanation& expl) {
    if (expl.n() == 0) throw DataError("heatmap_json: no explained rows");
    std::vector<std::size_t> order(expl.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return expl.margins[a] < expl.margins[b];
    });
    const auto imp = global_importance(expl);

    nlohmann::ordered_json j;
    j["base_value"] = expl.base_value;
    j["instance_order"] = order;
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& [name, value] : imp) j["features"].push_back(name);
    j["margins"] = nlohmann::ordered_json::array();
    for (std::size_t i : order) j["margins"].push_back(expl.margins[i]);
    j["shap"] = nlohmann::ordered_json::array();
    for (const auto& [name, value] : imp) {
        const auto it = std::find(expl.feature_names.begin(), expl.feature_names.end(), name);
        const auto fj = static_cast<std::size_t>(it - expl.feature_names.begin());
        nlohmann::ordered_json rowvals = nlohmann::ordered_json::array();
        for (std::size_t i : order) rowvals.push_back(expl.shap(i, fj));
        j["shap"].push_back(std::move(rowvals));
    }
    return j;
}

}  // namespace crashml

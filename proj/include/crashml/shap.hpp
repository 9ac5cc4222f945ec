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
#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "crashml/core.hpp"
#include "crashml/gbdt.hpp"

namespace crashml {

// ---------------------------------------------------------------------------
// Exact Shapley values by subset enumeration.
// ---------------------------------------------------------------------------

// Shapley values of the interventional value function
//   v(S) = mean over background rows b of predict(x restricted to S, b elsewhere),
// enumerated over every subset of active_features:
//   phi_i = sum_{S subset of A\{i}} |S|!(|A|-|S|-1)!/|A|! * [v(S+i) - v(S)].
// Features outside active_features get phi = 0. Exponential in |A|, hence the
// hard cap; this exists as ground truth for the polynomial tree algorithm.
inline std::vector<double> shapley_exact(const std::function<double(std::span<const double>)>& predict,
                                         std::span<const double> x, const Matrix& background,
                                         const std::vector<std::size_t>& active_features) {
    constexpr std::size_t kMaxActive = 14;
    const std::size_t a = active_features.size();
    if (a > kMaxActive) {
        throw ExplainError("shapley_exact: at most " + std::to_string(kMaxActive) +
                           " active features (got " + std::to_string(a) + ")");
    }
    if (background.rows() == 0) throw ExplainError("shapley_exact: empty background");
    if (background.cols() != x.size()) {
        throw ExplainError("shapley_exact: background width must match instance length");
    }
    for (std::size_t f : active_features) {
        if (f >= x.size()) throw ExplainError("shapley_exact: active feature out of range");
    }

    // v over all 2^a coalitions
    const std::size_t n_masks = std::size_t{1} << a;
    std::vector<double> v(n_masks, 0.0);
    std::vector<double> z(x.size());
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        double sum = 0.0;
        for (std::size_t r = 0; r < background.rows(); ++r) {
            const auto row = background.row(r);
            std::copy(row.begin(), row.end(), z.begin());
            for (std::size_t k = 0; k < a; ++k) {
                if (mask & (std::size_t{1} << k)) z[active_features[k]] = x[active_features[k]];
            }
            sum += predict(z);
        }
        v[mask] = sum / static_cast<double>(background.rows());
    }

    std::vector<double> factorial(a + 1, 1.0);
    for (std::size_t i = 1; i <= a; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

    std::vector<double> phi(x.size(), 0.0);
    for (std::size_t k = 0; k < a; ++k) {
        const std::size_t bit = std::size_t{1} << k;
        double acc = 0.0;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            const double w = factorial[s] * factorial[a - s - 1] / factorial[a];
            acc += w * (v[mask | bit] - v[mask]);
        }
        phi[active_features[k]] = acc;
    }
    return phi;
}

inline std::vector<double> shapley_exact(const std::function<double(std::span<const double>)>& predict,
                                         std::span<const double> x, const Matrix& background) {
    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return shapley_exact(predict, x, background, all);
}

// ---------------------------------------------------------------------------
// Path-dependent TreeSHAP.
// ---------------------------------------------------------------------------

namespace shap_detail {

// Decision-path bookkeeping: element i's pweight is the permutation weight of
// path subsets holding i "one" (followed-by-x) features.
struct PathElement {
    int feature_index = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

inline void extend_path(PathElement* path, std::size_t unique_depth, double zero_fraction,
                        double one_fraction, int feature_index) {
    path[unique_depth] = {feature_index, zero_fraction, one_fraction,
                          unique_depth == 0 ? 1.0 : 0.0};
    for (auto i = static_cast<std::ptrdiff_t>(unique_depth) - 1; i >= 0; --i) {
        path[i + 1].pweight += one_fraction * path[i].pweight * static_cast<double>(i + 1) /
                               static_cast<double>(unique_depth + 1);
        path[i].pweight = zero_fraction * path[i].pweight *
                          static_cast<double>(unique_depth - static_cast<std::size_t>(i)) /
                          static_cast<double>(unique_depth + 1);
    }
}

inline void unwind_path(PathElement* path, std::size_t unique_depth, std::size_t path_index) {
    const double one_fraction = path[path_index].one_fraction;
    const double zero_fraction = path[path_index].zero_fraction;
    double next_one_portion = path[unique_depth].pweight;
    for (auto i = static_cast<std::ptrdiff_t>(unique_depth) - 1; i >= 0; --i) {
        const auto d = static_cast<double>(unique_depth - static_cast<std::size_t>(i));
        if (one_fraction != 0.0) {
            const double tmp = path[i].pweight;
            path[i].pweight = next_one_portion * static_cast<double>(unique_depth + 1) /
                              (static_cast<double>(i + 1) * one_fraction);
            next_one_portion =
                tmp - path[i].pweight * zero_fraction * d / static_cast<double>(unique_depth + 1);
        } else {
            path[i].pweight =
                path[i].pweight * static_cast<double>(unique_depth + 1) / (zero_fraction * d);
        }
    }
    for (std::size_t i = path_index; i < unique_depth; ++i) {
        path[i].feature_index = path[i + 1].feature_index;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

inline double unwound_path_sum(const PathElement* path, std::size_t unique_depth,
                               std::size_t path_index) {
    const double one_fraction = path[path_index].one_fraction;
    const double zero_fraction = path[path_index].zero_fraction;
    double next_one_portion = path[unique_depth].pweight;
    double total = 0.0;
    for (auto i = static_cast<std::ptrdiff_t>(unique_depth) - 1; i >= 0; --i) {
        const auto d = static_cast<double>(unique_depth - static_cast<std::size_t>(i));
        if (one_fraction != 0.0) {
            const double tmp = next_one_portion * static_cast<double>(unique_depth + 1) /
                               (static_cast<double>(i + 1) * one_fraction);
            total += tmp;
            next_one_portion =
                path[i].pweight - tmp * zero_fraction * d / static_cast<double>(unique_depth + 1);
        } else if (zero_fraction != 0.0) {
            total += path[i].pweight / zero_fraction / (d / static_cast<double>(unique_depth + 1));
        }
    }
    return total;
}

inline void tree_shap_recurse(const DecisionTree& tree, std::span<const double> x,
                              std::vector<double>& phi, int node_id, std::size_t unique_depth,
                              PathElement* parent_path, double parent_zero_fraction,
                              double parent_one_fraction, int parent_feature_index) {
    PathElement* path = parent_path + unique_depth + 1;
    std::copy(parent_path, parent_path + unique_depth + 1, path);
    extend_path(path, unique_depth, parent_zero_fraction, parent_one_fraction,
                parent_feature_index);

    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) {
        for (std::size_t i = 1; i <= unique_depth; ++i) {
            const double w = unwound_path_sum(path, unique_depth, i);
            phi[static_cast<std::size_t>(path[i].feature_index)] +=
                w * (path[i].one_fraction - path[i].zero_fraction) * node.value;
        }
        return;
    }

    const int hot = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                : node.right;
    const int cold = hot == node.left ? node.right : node.left;
    const double wf = node.weight_fraction;
    if (!(wf > 0.0)) throw ExplainError("tree_shap: node weight_fraction must be positive");
    const double hot_zero_fraction = tree.nodes[static_cast<std::size_t>(hot)].weight_fraction / wf;
    const double cold_zero_fraction =
        tree.nodes[static_cast<std::size_t>(cold)].weight_fraction / wf;

    double incoming_zero_fraction = 1.0, incoming_one_fraction = 1.0;
    std::size_t path_index = 0;
    for (; path_index <= unique_depth; ++path_index) {
        if (path[path_index].feature_index == node.feature) break;
    }
    if (path_index != unique_depth + 1) {
        incoming_zero_fraction = path[path_index].zero_fraction;
        incoming_one_fraction = path[path_index].one_fraction;
        unwind_path(path, unique_depth, path_index);
        unique_depth -= 1;
    }

    tree_shap_recurse(tree, x, phi, hot, unique_depth + 1, path,
                      hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction,
                      node.feature);
    tree_shap_recurse(tree, x, phi, cold, unique_depth + 1, path,
                      cold_zero_fraction * incoming_zero_fraction, 0.0, node.feature);
}

inline double expected_leaf_value(const DecisionTree& tree, int node_id) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) return node.weight_fraction * node.value;
    return expected_leaf_value(tree, node.left) + expected_leaf_value(tree, node.right);
}

}  // namespace shap_detail

// Expected margin of the model under the weight_fraction distribution — the
// base value every attribution vector decomposes against.
inline double expected_margin(const GbdtModel& model) {
    double e = model.base_score;
    for (const DecisionTree& t : model.trees) {
        if (t.nodes.empty()) throw ExplainError("tree_shap: empty tree");
        if (!(t.nodes[0].weight_fraction > 0.0)) {
            throw ExplainError("tree_shap: model lacks weight statistics");
        }
        e += shap_detail::expected_leaf_value(t, 0) / t.nodes[0].weight_fraction;
    }
    return e;
}

// Polynomial-time attribution for tree ensembles: every decision path is
// walked once, features absent from a coalition flow down both branches in
// proportion to the nodes' weight_fractions, and the permutation weights of
// the exact Shapley sum are maintained incrementally along the path. Summing
// phi over features plus the expected margin reproduces predict_margin(x).
inline std::vector<double> tree_shap(const GbdtModel& model, std::span<const double> x) {
    if (x.size() != model.n_features()) {
        throw ExplainError("tree_shap: expected " + std::to_string(model.n_features()) +
                           " features, got " + std::to_string(x.size()));
    }
    std::vector<double> phi(x.size(), 0.0);
    for (const DecisionTree& tree : model.trees) {
        if (tree.nodes.empty() || !(tree.nodes[0].weight_fraction > 0.0)) {
            throw ExplainError("tree_shap: model lacks weight statistics");
        }
        const std::size_t maxd = tree.depth() + 2;
        std::vector<shap_detail::PathElement> path(maxd * (maxd + 1) / 2);
        shap_detail::tree_shap_recurse(tree, x, phi, 0, 0, path.data(), 1.0, 1.0, -1);
    }
    return phi;
}

// Tree-conditional value function: the expectation of the ensemble margin
// when features in the coalition follow x and the rest flow down branches by
// weight_fraction. Enumerating the exact Shapley sum over this game is the
// slow oracle the recursion above must agree with.
inline double coalition_margin(const GbdtModel& model, std::span<const double> x,
                               const std::vector<bool>& in_coalition) {
    if (x.size() != model.n_features() || in_coalition.size() != x.size()) {
        throw ExplainError("coalition_margin: dimension mismatch");
    }
    struct Walker {
        const DecisionTree& tree;
        std::span<const double> x;
        const std::vector<bool>& mask;

        double at(int id) const {
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
            if (node.is_leaf()) return node.value;
            if (mask[static_cast<std::size_t>(node.feature)]) {
                return at(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                      : node.right);
            }
            const double wf = node.weight_fraction;
            if (!(wf > 0.0)) throw ExplainError("coalition_margin: zero weight_fraction");
            const double wl = tree.nodes[static_cast<std::size_t>(node.left)].weight_fraction / wf;
            const double wr = tree.nodes[static_cast<std::size_t>(node.right)].weight_fraction / wf;
            return wl * at(node.left) + wr * at(node.right);
        }
    };
    double v = model.base_score;
    for (const DecisionTree& tree : model.trees) v += Walker{tree, x, in_coalition}.at(0);
    return v;
}

// Recomputes every node's weight_fraction (and hessian-free cover = row count)
// from a reference matrix, by routing each row. Used to tie the attribution's
// branch probabilities to an explicit background set.
inline GbdtModel with_weight_fractions_from(const GbdtModel& model, const Matrix& background) {
    if (background.rows() == 0) throw ExplainError("with_weight_fractions_from: empty background");
    if (background.cols() != model.n_features()) {
        throw ExplainError("with_weight_fractions_from: background width mismatch");
    }
    GbdtModel out = model;
    for (DecisionTree& tree : out.trees) {
        std::vector<double> count(tree.nodes.size(), 0.0);
        for (std::size_t r = 0; r < background.rows(); ++r) {
            const auto row = background.row(r);
            int id = 0;
            count[0] += 1.0;
            while (!tree.nodes[static_cast<std::size_t>(id)].is_leaf()) {
                const TreeNode& nd = tree.nodes[static_cast<std::size_t>(id)];
                id = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
                count[static_cast<std::size_t>(id)] += 1.0;
            }
        }
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            if (count[i] <= 0.0) {
                throw ExplainError(
                    "with_weight_fractions_from: background routes no rows through node " +
                    std::to_string(i));
            }
            tree.nodes[i].weight_fraction = count[i] / static_cast<double>(background.rows());
            tree.nodes[i].cover = count[i];
        }
    }
    return out;
}

}  // namespace crashml

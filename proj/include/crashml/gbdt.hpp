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
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashml/core.hpp"
#include "crashml/encode.hpp"
#include "crashml/histogram.hpp"

namespace crashml {

enum class Growth { leaf_wise, level_wise };

inline std::string growth_name(Growth g) {
    return g == Growth::leaf_wise ? "leaf_wise" : "level_wise";
}

inline Growth growth_from_name(const std::string& s) {
    if (s == "leaf_wise") return Growth::leaf_wise;
    if (s == "level_wise") return Growth::level_wise;
    throw ConfigError("unknown growth policy '" + s + "'");
}

struct GbdtConfig {
    std::size_t n_trees = 200;
    double learning_rate = 0.1;
    Growth growth = Growth::leaf_wise;
    std::size_t max_leaves = 31;   // leaf-wise stopping rule
    std::size_t max_depth = 6;     // level-wise stopping rule
    double min_child_hessian = 1.0;
    double lambda_l2 = 1.0;
    std::size_t max_bins = 32;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw ConfigError("gbdt: n_trees must be positive");
        if (!(learning_rate > 0.0)) throw ConfigError("gbdt: learning_rate must be positive");
        if (max_leaves < 2) throw ConfigError("gbdt: max_leaves must be at least 2");
        if (max_depth < 1) throw ConfigError("gbdt: max_depth must be at least 1");
        if (!(min_child_hessian > 0.0)) throw ConfigError("gbdt: min_child_hessian must be positive");
        if (!(lambda_l2 > 0.0)) throw ConfigError("gbdt: lambda_l2 must be positive");
        if (max_bins < 2) throw ConfigError("gbdt: max_bins must be at least 2");
    }
};

inline nlohmann::ordered_json gbdt_config_to_json(const GbdtConfig& c) {
    nlohmann::ordered_json j;
    j["n_trees"] = c.n_trees;
    j["learning_rate"] = c.learning_rate;
    j["growth"] = growth_name(c.growth);
    j["max_leaves"] = c.max_leaves;
    j["max_depth"] = c.max_depth;
    j["min_child_hessian"] = c.min_child_hessian;
    j["lambda_l2"] = c.lambda_l2;
    j["max_bins"] = c.max_bins;
    j["seed"] = c.seed;
    return j;
}

inline GbdtConfig gbdt_config_from_json(const nlohmann::json& j) {
    GbdtConfig c;
    if (j.contains("n_trees")) c.n_trees = j.at("n_trees").get<std::size_t>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("growth")) c.growth = growth_from_name(j.at("growth").get<std::string>());
    if (j.contains("max_leaves")) c.max_leaves = j.at("max_leaves").get<std::size_t>();
    if (j.contains("max_depth")) c.max_depth = j.at("max_depth").get<std::size_t>();
    if (j.contains("min_child_hessian")) c.min_child_hessian = j.at("min_child_hessian").get<double>();
    if (j.contains("lambda_l2")) c.lambda_l2 = j.at("lambda_l2").get<double>();
    if (j.contains("max_bins")) c.max_bins = j.at("max_bins").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

// One tree node. Internal nodes route x[feature] <= threshold to the left.
// cover is the hessian mass of the training rows through the node;
// weight_fraction is the row fraction, which downstream attribution uses as
// the branch probability for features absent from a coalition.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;  // leaf log-odds increment, learning rate included
    double cover = 0.0;
    double weight_fraction = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const {
        int id = 0;
        while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
            id = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(id)].value;
    }

    // Leaf id reached by x; exposes the routing itself for tests.
    int route(std::span<const double> x) const {
        int id = 0;
        while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
            id = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return id;
    }

    std::size_t n_leaves() const {
        std::size_t k = 0;
        for (const TreeNode& nd : nodes) k += nd.is_leaf() ? 1 : 0;
        return k;
    }

    std::size_t depth() const { return depth_below(0); }

private:
    std::size_t depth_below(int id) const {
        const TreeNode& nd = nodes[static_cast<std::size_t>(id)];
        if (nd.is_leaf()) return 0;
        return 1 + std::max(depth_below(nd.left), depth_below(nd.right));
    }
};

struct GbdtModel {
    GbdtConfig config;
    double base_score = 0.0;
    std::vector<std::string> feature_names;
    std::vector<DecisionTree> trees;

    std::size_t n_features() const { return feature_names.size(); }

    double predict_margin(std::span<const double> x) const {
        if (x.size() != feature_names.size()) {
            throw DataError("predict_margin: expected " + std::to_string(feature_names.size()) +
                            " features, got " + std::to_string(x.size()));
        }
        double m = base_score;
        for (const DecisionTree& t : trees) m += t.predict(x);
        return m;
    }

    double predict_proba(std::span<const double> x) const { return sigmoid(predict_margin(x)); }

    std::vector<double> predict_margins(const Matrix& x) const {
        std::vector<double> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_margin(x.row(i));
        return out;
    }

    std::vector<double> predict_probas(const Matrix& x) const {
        std::vector<double> out = predict_margins(x);
        for (double& m : out) m = sigmoid(m);
        return out;
    }

    std::vector<int> predict_labels(const Matrix& x, double threshold = 0.5) const {
        std::vector<int> out(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            out[i] = predict_proba(x.row(i)) >= threshold ? 1 : 0;
        }
        return out;
    }
};

// Per-split bookkeeping captured during fitting, for audits that recompute
// gains from raw gradient/hessian sums.
struct SplitRecord {
    std::size_t tree = 0;
    int node = 0;
    int feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    double g_left = 0.0, h_left = 0.0, g_right = 0.0, h_right = 0.0;
};

struct FitTrace {
    std::vector<double> round_train_loss;  // mean logistic loss after each round
    std::vector<SplitRecord> splits;
};

namespace gbdt_detail {

struct NodeBuild {
    int node_id = 0;
    std::size_t begin = 0, end = 0;  // range into the shared row-partition array
    std::size_t depth = 0;
    double sum_g = 0.0, sum_h = 0.0;
    // best candidate split
    bool has_split = false;
    int feature = -1;
    std::size_t boundary = 0;  // bins <= boundary go left
    double gain = 0.0, g_left = 0.0, h_left = 0.0;
    std::size_t count_left = 0;
};

struct Workspace {
    std::vector<std::size_t> rows;      // row partition, reordered in place
    std::vector<std::size_t> scratch;   // partition buffer
    std::vector<double> g_hist, h_hist;
    std::vector<std::size_t> c_hist;
};

// Scans every feature's histogram over the node's rows for the best split.
// Ties in gain keep the earliest candidate (lowest feature, lowest boundary).
inline void find_best_split(NodeBuild& nb, const BinnedMatrix& binned, const HistogramBins& bins,
                            const std::vector<double>& g, const std::vector<double>& h,
                            const GbdtConfig& cfg, Workspace& ws) {
    nb.has_split = false;
    nb.gain = 0.0;
    const double parent_score = nb.sum_g * nb.sum_g / (nb.sum_h + cfg.lambda_l2);
    for (std::size_t f = 0; f < bins.n_features(); ++f) {
        const std::size_t n_edges = bins.edges[f].size();
        if (n_edges == 0) continue;
        const std::size_t nb_bins = n_edges + 1;
        std::fill(ws.g_hist.begin(), ws.g_hist.begin() + static_cast<std::ptrdiff_t>(nb_bins), 0.0);
        std::fill(ws.h_hist.begin(), ws.h_hist.begin() + static_cast<std::ptrdiff_t>(nb_bins), 0.0);
        std::fill(ws.c_hist.begin(), ws.c_hist.begin() + static_cast<std::ptrdiff_t>(nb_bins),
                  std::size_t{0});
        const auto& fbins = binned.by_feature[f];
        for (std::size_t r = nb.begin; r < nb.end; ++r) {
            const std::size_t b = fbins[ws.rows[r]];
            ws.g_hist[b] += g[ws.rows[r]];
            ws.h_hist[b] += h[ws.rows[r]];
            ws.c_hist[b] += 1;
        }
        double gl = 0.0, hl = 0.0;
        std::size_t cl = 0;
        for (std::size_t b = 0; b < n_edges; ++b) {
            gl += ws.g_hist[b];
            hl += ws.h_hist[b];
            cl += ws.c_hist[b];
            const double gr = nb.sum_g - gl, hr = nb.sum_h - hl;
            if (hl < cfg.min_child_hessian || hr < cfg.min_child_hessian) continue;
            if (cl == 0 || cl == nb.end - nb.begin) continue;
            const double gain = 0.5 * (gl * gl / (hl + cfg.lambda_l2) +
                                       gr * gr / (hr + cfg.lambda_l2) - parent_score);
            if (gain > nb.gain) {
                nb.has_split = true;
                nb.gain = gain;
                nb.feature = static_cast<int>(f);
                nb.boundary = b;
                nb.g_left = gl;
                nb.h_left = hl;
                nb.count_left = cl;
            }
        }
    }
}

// Stable-partitions the node's rows by bin <= boundary, preserving row order
// within each side.
inline std::size_t apply_partition(const NodeBuild& nb, const BinnedMatrix& binned, Workspace& ws) {
    const auto& fbins = binned.by_feature[static_cast<std::size_t>(nb.feature)];
    std::size_t lo = nb.begin, hi = 0;
    for (std::size_t r = nb.begin; r < nb.end; ++r) {
        if (fbins[ws.rows[r]] <= nb.boundary) {
            ws.rows[lo++] = ws.rows[r];
        } else {
            ws.scratch[hi++] = ws.rows[r];
        }
    }
    std::copy(ws.scratch.begin(), ws.scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              ws.rows.begin() + static_cast<std::ptrdiff_t>(lo));
    return lo;  // first right-side position
}

}  // namespace gbdt_detail

// Fits a histogram-based boosted ensemble on the logistic loss. Growth is
// either leaf-wise (split the frontier leaf with the largest gain until
// max_leaves) or level-wise (split every splittable node per level until
// max_depth). Candidate splits must leave at least min_child_hessian of
// hessian mass on each side and strictly reduce the regularized loss.
// Learning rate is folded into stored leaf values, so a margin is base_score
// plus a plain sum over trees. Fully deterministic.
inline GbdtModel fit_gbdt(const EncodedMatrix& train, const GbdtConfig& cfg,
                          FitTrace* trace = nullptr) {
    cfg.validate();
    const std::size_t n = train.n(), p = train.p();
    if (n == 0 || p == 0) throw TrainError("fit_gbdt: empty training matrix");
    const std::size_t n_pos = train.count_class(1);
    if (n_pos == 0 || n_pos == n) throw TrainError("fit_gbdt: both classes must be present");

    GbdtModel model;
    model.config = cfg;
    model.feature_names = train.feature_names;
    const double p_bar = static_cast<double>(n_pos) / static_cast<double>(n);
    model.base_score = std::log(p_bar / (1.0 - p_bar));

    const HistogramBins bins = build_histograms(train.x, cfg.max_bins);
    const BinnedMatrix binned = bin_matrix(train.x, bins);

    gbdt_detail::Workspace ws;
    ws.rows.resize(n);
    ws.scratch.resize(n);
    std::size_t widest = 2;
    for (std::size_t f = 0; f < p; ++f) widest = std::max(widest, bins.n_bins(f));
    ws.g_hist.resize(widest);
    ws.h_hist.resize(widest);
    ws.c_hist.resize(widest);

    std::vector<double> margin(n, model.base_score), g(n), h(n);

    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double prob = sigmoid(margin[i]);
            g[i] = prob - static_cast<double>(train.y[i]);
            h[i] = prob * (1.0 - prob);
        }
        for (std::size_t i = 0; i < n; ++i) ws.rows[i] = i;

        DecisionTree tree;
        auto make_node = [&](std::size_t begin, std::size_t end, std::size_t depth) {
            gbdt_detail::NodeBuild nb;
            nb.node_id = static_cast<int>(tree.nodes.size());
            nb.begin = begin;
            nb.end = end;
            nb.depth = depth;
            for (std::size_t r = begin; r < end; ++r) {
                nb.sum_g += g[ws.rows[r]];
                nb.sum_h += h[ws.rows[r]];
            }
            TreeNode node;
            node.value = -cfg.learning_rate * nb.sum_g / (nb.sum_h + cfg.lambda_l2);
            node.cover = nb.sum_h;
            node.weight_fraction = static_cast<double>(end - begin) / static_cast<double>(n);
            tree.nodes.push_back(node);
            gbdt_detail::find_best_split(nb, binned, bins, g, h, cfg, ws);
            return nb;
        };

        auto split_node = [&](const gbdt_detail::NodeBuild& nb)
            -> std::pair<gbdt_detail::NodeBuild, gbdt_detail::NodeBuild> {
            const std::size_t mid = gbdt_detail::apply_partition(nb, binned, ws);
            const double threshold = bins.edges[static_cast<std::size_t>(nb.feature)][nb.boundary];
            gbdt_detail::NodeBuild left = make_node(nb.begin, mid, nb.depth + 1);
            gbdt_detail::NodeBuild right = make_node(mid, nb.end, nb.depth + 1);
            TreeNode& parent = tree.nodes[static_cast<std::size_t>(nb.node_id)];
            parent.feature = nb.feature;
            parent.threshold = threshold;
            parent.left = left.node_id;
            parent.right = right.node_id;
            parent.value = 0.0;
            if (trace) {
                trace->splits.push_back({t, nb.node_id, nb.feature, threshold, nb.gain, nb.g_left,
                                         nb.h_left, nb.sum_g - nb.g_left, nb.sum_h - nb.h_left});
            }
            return {left, right};
        };

        std::vector<gbdt_detail::NodeBuild> leaves;
        leaves.push_back(make_node(0, n, 0));

        if (cfg.growth == Growth::leaf_wise) {
            while (leaves.size() < cfg.max_leaves) {
                std::size_t best = leaves.size();
                double best_gain = 0.0;
                for (std::size_t i = 0; i < leaves.size(); ++i) {
                    if (leaves[i].has_split && leaves[i].gain > best_gain) {
                        best_gain = leaves[i].gain;
                        best = i;
                    }
                }
                if (best == leaves.size()) break;
                auto [left, right] = split_node(leaves[best]);
                leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(best));
                leaves.push_back(left);
                leaves.push_back(right);
            }
        } else {
            std::vector<gbdt_detail::NodeBuild> level = std::move(leaves);
            leaves.clear();
            std::size_t depth = 0;
            while (depth < cfg.max_depth && !level.empty()) {
                std::vector<gbdt_detail::NodeBuild> next;
                for (const auto& nb : level) {
                    if (nb.has_split) {
                        auto [left, right] = split_node(nb);
                        next.push_back(left);
                        next.push_back(right);
                    } else {
                        leaves.push_back(nb);
                    }
                }
                level = std::move(next);
                ++depth;
            }
            for (const auto& nb : level) leaves.push_back(nb);
        }

        for (const auto& nb : leaves) {
            const double value = tree.nodes[static_cast<std::size_t>(nb.node_id)].value;
            for (std::size_t r = nb.begin; r < nb.end; ++r) margin[ws.rows[r]] += value;
        }
        model.trees.push_back(std::move(tree));

        if (trace) {
            double loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) loss += log_loss_term(train.y[i], sigmoid(margin[i]));
            trace->round_train_loss.push_back(loss / static_cast<double>(n));
        }
    }
    return model;
}

// --- serialization -----------------------------------------------------

namespace gbdt_detail {

inline nlohmann::ordered_json node_to_json(const DecisionTree& tree, int id) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(id)];
    nlohmann::ordered_json j;
    if (nd.is_leaf()) {
        j["leaf"] = nd.value;
    } else {
        j["feature"] = nd.feature;
        j["threshold"] = nd.threshold;
    }
    j["cover"] = nd.cover;
    j["weight_fraction"] = nd.weight_fraction;
    if (!nd.is_leaf()) {
        j["left"] = node_to_json(tree, nd.left);
        j["right"] = node_to_json(tree, nd.right);
    }
    return j;
}

inline int node_from_json(const nlohmann::json& j, DecisionTree& tree) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode nd;
    nd.cover = j.at("cover").get<double>();
    nd.weight_fraction = j.at("weight_fraction").get<double>();
    if (j.contains("leaf")) {
        nd.value = j.at("leaf").get<double>();
    } else {
        nd.feature = j.at("feature").get<int>();
        nd.threshold = j.at("threshold").get<double>();
        nd.left = node_from_json(j.at("left"), tree);
        nd.right = node_from_json(j.at("right"), tree);
    }
    tree.nodes[static_cast<std::size_t>(id)] = nd;
    return id;
}

}  // namespace gbdt_detail

inline nlohmann::ordered_json model_to_json(const GbdtModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "crashml-gbdt";
    j["version"] = 1;
    j["config"] = gbdt_config_to_json(model.config);
    j["base_score"] = model.base_score;
    j["feature_names"] = model.feature_names;
    j["trees"] = nlohmann::ordered_json::array();
    for (const DecisionTree& t : model.trees) {
        j["trees"].push_back(gbdt_detail::node_to_json(t, 0));
    }
    return j;
}

inline GbdtModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "crashml-gbdt") {
            throw ConfigError("model file has unknown format tag");
        }
        GbdtModel model;
        model.config = gbdt_config_from_json(j.at("config"));
        model.base_score = j.at("base_score").get<double>();
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        for (const auto& tj : j.at("trees")) {
            DecisionTree tree;
            gbdt_detail::node_from_json(tj, tree);
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid model JSON: ") + e.what());
    }
}

inline void save_model(const GbdtModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << model_to_json(model).dump(2) << '\n';
    if (!out.good()) throw ConfigError("failed writing '" + path + "'");
}

inline GbdtModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cannot parse model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace crashml

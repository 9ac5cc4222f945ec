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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crashml/core.hpp"
#include "crashml/table.hpp"

namespace crashml {

// Numeric design matrix with the bookkeeping needed to apply the same
// transform to later data: per-feature category codes and min-max parameters.
struct EncodedMatrix {
    Matrix x;
    std::vector<int> y;  // 1 = Fatal
    std::vector<std::string> feature_names;
    std::vector<std::map<std::string, int>> encoding_maps;  // empty map for numeric columns
    std::vector<std::pair<double, double>> scale_params;    // (min, max); empty until scaled

    std::size_t n() const { return x.rows(); }
    std::size_t p() const { return x.cols(); }
    bool scaled() const { return !scale_params.empty(); }

    std::size_t count_class(int label) const {
        std::size_t c = 0;
        for (int v : y) c += (v == label) ? 1 : 0;
        return c;
    }
};

// Turns a cleaned, binarized table into numbers. Categorical features are
// coded by the lexicographic order of the categories observed in this table
// (deterministic and shuffle-independent), ordinal features by their declared
// category order, numeric features pass through. Target: Non Fatal=0, Fatal=1.
inline EncodedMatrix encode(const RawTable& table) {
    const auto& schema = table.schema;
    const std::size_t p = schema.features.size();
    const std::size_t n = table.rows.size();
    if (n == 0) throw DataError("encode: empty table");

    EncodedMatrix m;
    m.x = Matrix(n, p);
    m.y.resize(n);
    m.feature_names.reserve(p);
    m.encoding_maps.resize(p);

    for (std::size_t j = 0; j < p; ++j) {
        const ColumnSpec& spec = schema.features[j];
        m.feature_names.push_back(spec.name);
        if (spec.kind == ColumnKind::numeric) continue;
        if (spec.kind == ColumnKind::ordinal) {
            for (std::size_t c = 0; c < spec.categories.size(); ++c) {
                m.encoding_maps[j][spec.categories[c]] = static_cast<int>(c);
            }
        } else {
            std::set<std::string> observed;
            for (const auto& row : table.rows) {
                if (!row[j].is_null()) observed.insert(row[j].str());
            }
            int code = 0;
            for (const auto& cat : observed) {  // std::set iterates lexicographically
                if (!spec.category_index(cat)) {
                    throw DataError("encode: category '" + cat + "' not admissible for feature '" +
                                    spec.name + "'");
                }
                m.encoding_maps[j][cat] = code++;
            }
        }
    }

    const std::size_t tcol = table.target_column();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        for (std::size_t j = 0; j < p; ++j) {
            const ColumnSpec& spec = schema.features[j];
            const Cell& cell = row[j];
            if (cell.is_null()) throw DataError("encode: null cell in row " + std::to_string(i));
            if (spec.kind == ColumnKind::numeric) {
                m.x(i, j) = cell.num();
            } else {
                const auto it = m.encoding_maps[j].find(cell.str());
                if (it == m.encoding_maps[j].end()) {
                    throw DataError("encode: category '" + cell.str() +
                                    "' not admissible for feature '" + spec.name + "'");
                }
                m.x(i, j) = static_cast<double>(it->second);
            }
        }
        const Cell& target = row[tcol];
        if (target.is_null()) throw DataError("encode: null target in row " + std::to_string(i));
        const auto idx = schema.target.category_index(target.str());
        if (!idx) {
            throw DataError("encode: target value '" + target.str() + "' not admissible");
        }
        m.y[i] = *idx;
    }

    const std::size_t pos = m.count_class(1);
    if (pos == 0 || pos == n) {
        throw DataError("encode: dataset contains a single target class");
    }
    return m;
}

// Re-encodes a table with category codes learned earlier. Unknown categories
// are an error here, not a new code.
inline EncodedMatrix encode_with_maps(const RawTable& table,
                                      const std::vector<std::string>& feature_names,
                                      const std::vector<std::map<std::string, int>>& maps) {
    const auto& schema = table.schema;
    const std::size_t p = feature_names.size();
    EncodedMatrix m;
    m.x = Matrix(table.rows.size(), p);
    m.y.resize(table.rows.size());
    m.feature_names = feature_names;
    m.encoding_maps = maps;

    std::vector<std::size_t> col_of(p);
    std::vector<const ColumnSpec*> spec_of(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto idx = schema.feature_index(feature_names[j]);
        if (!idx) throw DataError("encode_with_maps: table lacks feature '" + feature_names[j] + "'");
        col_of[j] = *idx;
        spec_of[j] = &schema.features[*idx];
    }

    const std::size_t tcol = table.target_column();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        for (std::size_t j = 0; j < p; ++j) {
            const Cell& cell = row[col_of[j]];
            if (cell.is_null()) throw DataError("encode_with_maps: null cell in row " + std::to_string(i));
            if (spec_of[j]->kind == ColumnKind::numeric) {
                m.x(i, j) = cell.num();
            } else {
                const auto it = maps[j].find(cell.str());
                if (it == maps[j].end()) {
                    throw DataError("encode_with_maps: unseen category '" + cell.str() +
                                    "' for feature '" + feature_names[j] + "'");
                }
                m.x(i, j) = static_cast<double>(it->second);
            }
        }
        const auto idx = schema.target.category_index(row[tcol].str());
        if (!idx) throw DataError("encode_with_maps: target value not admissible");
        m.y[i] = *idx;
    }
    return m;
}

// Fits per-feature (min, max) on this matrix and rescales x' = (x-min)/(max-min).
// Constant features map to 0. Intended for the training partition; the test
// side goes through apply_scale with the stored parameters.
inline EncodedMatrix scale_minmax(const EncodedMatrix& m) {
    EncodedMatrix out = m;
    out.scale_params.resize(m.p());
    for (std::size_t j = 0; j < m.p(); ++j) {
        double lo = m.x(0, j), hi = m.x(0, j);
        for (std::size_t i = 1; i < m.n(); ++i) {
            lo = std::min(lo, m.x(i, j));
            hi = std::max(hi, m.x(i, j));
        }
        out.scale_params[j] = {lo, hi};
        const double span = hi - lo;
        for (std::size_t i = 0; i < m.n(); ++i) {
            out.x(i, j) = span > 0 ? (m.x(i, j) - lo) / span : 0.0;
        }
    }
    return out;
}

// Applies stored scaling parameters; out-of-range values clamp to [0, 1].
inline EncodedMatrix apply_scale(const EncodedMatrix& m,
                                 const std::vector<std::pair<double, double>>& params) {
    if (params.size() != m.p()) throw DataError("apply_scale: parameter count mismatch");
    EncodedMatrix out = m;
    out.scale_params = params;
    for (std::size_t j = 0; j < m.p(); ++j) {
        const auto [lo, hi] = params[j];
        const double span = hi - lo;
        for (std::size_t i = 0; i < m.n(); ++i) {
            const double v = span > 0 ? (m.x(i, j) - lo) / span : 0.0;
            out.x(i, j) = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

inline EncodedMatrix subset_rows(const EncodedMatrix& m, const std::vector<std::size_t>& idx) {
    EncodedMatrix out;
    out.x = Matrix(idx.size(), m.p());
    out.y.resize(idx.size());
    out.feature_names = m.feature_names;
    out.encoding_maps = m.encoding_maps;
    out.scale_params = m.scale_params;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < m.p(); ++j) out.x(i, j) = m.x(idx[i], j);
        out.y[i] = m.y[idx[i]];
    }
    return out;
}

inline EncodedMatrix subset_columns(const EncodedMatrix& m, const std::vector<std::size_t>& cols) {
    EncodedMatrix out;
    out.x = Matrix(m.n(), cols.size());
    out.y = m.y;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.feature_names.push_back(m.feature_names[cols[j]]);
        out.encoding_maps.push_back(m.encoding_maps[cols[j]]);
        if (m.scaled()) out.scale_params.push_back(m.scale_params[cols[j]]);
        for (std::size_t i = 0; i < m.n(); ++i) out.x(i, j) = m.x(i, cols[j]);
    }
    return out;
}

// Class-stratified train/test partition. Per-class test counts are
// round(class_count * test_fraction); membership is a seeded shuffle, and the
// surviving rows keep their original relative order.
inline std::pair<EncodedMatrix, EncodedMatrix> stratified_split(const EncodedMatrix& m,
                                                                double test_fraction,
                                                                std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("stratified_split: test_fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> class_idx[2];
    for (std::size_t i = 0; i < m.n(); ++i) class_idx[m.y[i]].push_back(i);

    Rng rng(seed);
    std::vector<bool> in_test(m.n(), false);
    for (int cls = 0; cls < 2; ++cls) {
        auto& idx = class_idx[cls];
        if (idx.size() < 2) {
            throw DataError("stratified_split: class " + std::to_string(cls) +
                            " has fewer than 2 members");
        }
        const auto want = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * test_fraction));
        if (want == 0 || want >= idx.size()) {
            throw DataError("stratified_split: class " + std::to_string(cls) +
                            " too small to stratify at this fraction");
        }
        rng.shuffle(idx);
        for (std::size_t k = 0; k < want; ++k) in_test[idx[k]] = true;
    }

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < m.n(); ++i) {
        (in_test[i] ? test_idx : train_idx).push_back(i);
    }
    return {subset_rows(m, train_idx), subset_rows(m, test_idx)};
}

}  // namespace crashml

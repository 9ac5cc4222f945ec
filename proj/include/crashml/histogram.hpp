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
#include <cstdint>
#include <vector>

#include "crashml/core.hpp"

namespace crashml {

// Per-feature bin upper edges. A value's bin is the count of edges below it;
// features with few distinct values get one bin per value, otherwise edges sit
// at empirical quantile ranks. Edges are midpoints between adjacent observed
// values, so no observed value ever falls exactly on an edge.
struct HistogramBins {
    std::vector<std::vector<double>> edges;

    std::size_t n_features() const { return edges.size(); }
    std::size_t n_bins(std::size_t f) const { return edges[f].size() + 1; }

    std::size_t bin_of(std::size_t f, double v) const {
        const auto& e = edges[f];
        return static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), v) - e.begin());
    }
};

inline HistogramBins build_histograms(const Matrix& x, std::size_t max_bins) {
    if (x.rows() == 0) throw DataError("build_histograms: empty matrix");
    if (max_bins < 2) throw ConfigError("build_histograms: max_bins must be at least 2");

    HistogramBins bins;
    bins.edges.resize(x.cols());
    std::vector<double> values(x.rows());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        for (std::size_t i = 0; i < x.rows(); ++i) values[i] = x(i, f);
        std::sort(values.begin(), values.end());

        std::size_t distinct = 1;
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (values[i] != values[i - 1]) ++distinct;
        }

        auto& edges = bins.edges[f];
        if (distinct <= 1) continue;
        if (distinct <= max_bins) {
            for (std::size_t i = 1; i < values.size(); ++i) {
                if (values[i] != values[i - 1]) {
                    edges.push_back(0.5 * (values[i - 1] + values[i]));
                }
            }
        } else {
            // Quantile edges: cut at ranks b*n/max_bins, skipping cuts that
            // would land inside a run of equal values.
            const std::size_t n = values.size();
            for (std::size_t b = 1; b < max_bins; ++b) {
                const std::size_t r = b * n / max_bins;
                if (r == 0 || r >= n || values[r - 1] == values[r]) continue;
                const double e = 0.5 * (values[r - 1] + values[r]);
                if (edges.empty() || e > edges.back()) edges.push_back(e);
            }
        }
    }
    return bins;
}

// Column-major bin indices for a training matrix.
struct BinnedMatrix {
    std::vector<std::vector<std::uint32_t>> by_feature;  // [feature][row]
    std::size_t n_rows = 0;
};

inline BinnedMatrix bin_matrix(const Matrix& x, const HistogramBins& bins) {
    BinnedMatrix out;
    out.n_rows = x.rows();
    out.by_feature.resize(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        out.by_feature[f].resize(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            out.by_feature[f][i] = static_cast<std::uint32_t>(bins.bin_of(f, x(i, f)));
        }
    }
    return out;
}

}  // namespace crashml

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
#include <vector>

#include "crashml/core.hpp"
#include "crashml/encode.hpp"

namespace crashml {

struct SmoteConfig {
    std::size_t k = 5;          // neighbors considered per seed point
    double ratio = 1.0;         // target minority size as a fraction of majority size
    std::uint64_t seed = 0;

    void validate() const {
        if (k < 1) throw ConfigError("smote: k must be at least 1");
        if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("smote: ratio must lie in (0, 1]");
    }
};

namespace smote_detail {

inline double sq_dist(const Matrix& x, std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double t = x(a, j) - x(b, j);
        d += t * t;
    }
    return d;
}

// Indices (into `members`) of the k nearest members to members[i], self
// excluded. Distance ties resolve toward the lower row index.
inline std::vector<std::size_t> k_nearest(const Matrix& x, const std::vector<std::size_t>& members,
                                          std::size_t i, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(members.size() - 1);
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (m == i) continue;
        dist.emplace_back(sq_dist(x, members[i], members[m]), m);
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    std::vector<std::size_t> out(take);
    for (std::size_t t = 0; t < take; ++t) out[t] = dist[t].second;
    return out;
}

}  // namespace smote_detail

// Oversamples the minority class with synthetic points interpolated between
// minority rows and their minority-class nearest neighbors:
//   x_new = x + u * (x_nn - x),  u drawn from the open interval (0, 1).
// Original rows keep their order; synthetic rows append after them. Seeds
// cycle through the minority rows in index order, so the draw sequence is a
// pure function of (matrix, labels, config).
inline EncodedMatrix smote_oversample(const EncodedMatrix& data, const SmoteConfig& config) {
    config.validate();
    const std::size_t n0 = data.count_class(0), n1 = data.count_class(1);
    if (n0 == 0 || n1 == 0) throw DataError("smote: both classes must be present");
    const int minority = n1 <= n0 ? 1 : 0;
    const std::size_t n_min = std::min(n0, n1), n_maj = std::max(n0, n1);
    if (n_min < 2) throw DataError("smote: minority class needs at least 2 rows");

    const auto want = static_cast<std::size_t>(
        std::ceil(config.ratio * static_cast<double>(n_maj)));
    if (want <= n_min) return data;
    const std::size_t n_new = want - n_min;

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (data.y[i] == minority) members.push_back(i);
    }

    std::vector<std::vector<std::size_t>> nn(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        nn[i] = smote_detail::k_nearest(data.x, members, i, config.k);
    }

    EncodedMatrix out = data;
    out.x = Matrix(data.n() + n_new, data.p());
    std::copy(data.x.data().begin(), data.x.data().end(), out.x.data().begin());
    out.y.resize(data.n() + n_new, minority);

    Rng rng(config.seed);
    for (std::size_t s = 0; s < n_new; ++s) {
        const std::size_t i = s % members.size();
        const std::size_t nb = nn[i][rng.uniform_below(nn[i].size())];
        const double u = rng.open01();
        const auto base = data.x.row(members[i]);
        const auto neigh = data.x.row(members[nb]);
        for (std::size_t j = 0; j < data.p(); ++j) {
            out.x(data.n() + s, j) = base[j] + u * (neigh[j] - base[j]);
        }
    }
    return out;
}

}  // namespace crashml

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
#include <vector>

#include "crashml/core.hpp"

namespace crashml {

struct KFoldSplit {
    std::vector<std::vector<std::size_t>> test_indices;  // one sorted vector per fold

    std::size_t k() const { return test_indices.size(); }

    std::vector<std::size_t> train_of(std::size_t fold, std::size_t n) const {
        std::vector<bool> held(n, false);
        for (std::size_t i : test_indices.at(fold)) held[i] = true;
        std::vector<std::size_t> train;
        train.reserve(n - test_indices[fold].size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!held[i]) train.push_back(i);
        }
        return train;
    }
};

// Stratified k-fold assignment: each class's rows are shuffled with a
// class-specific stream off the seed, then dealt round-robin across folds, so
// every fold's class mix tracks the full set to within one row per class.
// Indices within each fold come back sorted.
inline KFoldSplit stratified_kfold(const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw DataError("stratified_kfold: labels must be 0/1");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    for (std::size_t c = 0; c < 2; ++c) {
        if (by_class[c].size() < k) {
            throw DataError("stratified_kfold: every class needs at least k rows");
        }
    }

    KFoldSplit split;
    split.test_indices.assign(k, {});
    for (std::size_t c = 0; c < 2; ++c) {
        Rng rng(Rng::mix(seed, c));
        rng.shuffle(by_class[c]);
        for (std::size_t i = 0; i < by_class[c].size(); ++i) {
            split.test_indices[i % k].push_back(by_class[c][i]);
        }
    }
    for (auto& fold : split.test_indices) std::sort(fold.begin(), fold.end());
    return split;
}

}  // namespace crashml

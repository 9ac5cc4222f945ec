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

#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "crashml/smote.hpp"
#include "helpers.hpp"

using namespace crashml;

namespace {

// n0 negatives then n1 positives, uniform in the unit box.
EncodedMatrix imbalanced(std::size_t n0, std::size_t n1, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n0 + n1; ++i) {
        std::vector<double> r(p);
        for (auto& v : r) v = rng.uniform01();
        rows.push_back(std::move(r));
        y.push_back(i < n0 ? 0 : 1);
    }
    return testutil::make_encoded(rows, y);
}

// Checks that `row` is a strict interior point of the segment between some
// minority seed row and one of that seed's k nearest minority neighbors.
bool is_valid_interpolation(const EncodedMatrix& orig, const Matrix& x, std::size_t row,
                            int minority, std::size_t k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < orig.n(); ++i) {
        if (orig.y[i] == minority) members.push_back(i);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto nn = smote_detail::k_nearest(orig.x, members, i, k);
        for (const std::size_t nb : nn) {
            const auto a = orig.x.row(members[i]);
            const auto b = orig.x.row(members[nb]);
            // Solve for u on the first separating coordinate, then verify.
            double u = -1.0;
            for (std::size_t j = 0; j < orig.p(); ++j) {
                if (b[j] != a[j]) {
                    u = (x(row, j) - a[j]) / (b[j] - a[j]);
                    break;
                }
            }
            if (!(u > 0.0 && u < 1.0)) continue;
            bool all = true;
            for (std::size_t j = 0; j < orig.p(); ++j) {
                if (std::abs(a[j] + u * (b[j] - a[j]) - x(row, j)) > 1e-12) {
                    all = false;
                    break;
                }
            }
            if (all) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("smote reaches the exact requested count", "[smote]") {
    // The headline configuration: 931 majority / 428 minority balances to
    // 931 + 931 = 1862 rows at ratio 1.
    const EncodedMatrix data = imbalanced(931, 428, 4, 1);
    SmoteConfig cfg;
    cfg.seed = 3;
    const EncodedMatrix out = smote_oversample(data, cfg);
    CHECK(out.n() == 1862);
    CHECK(out.count_class(0) == 931);
    CHECK(out.count_class(1) == 931);
}

TEST_CASE("partial ratios round the target count up", "[smote]") {
    const EncodedMatrix data = imbalanced(100, 30, 3, 2);
    SmoteConfig cfg;
    cfg.ratio = 0.75;  // ceil(0.75 * 100) = 75 minority rows
    cfg.seed = 1;
    const EncodedMatrix out = smote_oversample(data, cfg);
    CHECK(out.count_class(1) == 75);
    CHECK(out.count_class(0) == 100);
}

TEST_CASE("original rows survive bit-identically and in order", "[smote]") {
    const EncodedMatrix data = imbalanced(40, 12, 5, 7);
    SmoteConfig cfg;
    cfg.seed = 9;
    const EncodedMatrix out = smote_oversample(data, cfg);
    REQUIRE(out.n() > data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        CHECK(out.y[i] == data.y[i]);
        for (std::size_t j = 0; j < data.p(); ++j) {
            REQUIRE(out.x(i, j) == data.x(i, j));
        }
    }
    // Synthetic rows all carry the minority label.
    for (std::size_t i = data.n(); i < out.n(); ++i) CHECK(out.y[i] == 1);
}

TEST_CASE("synthetic rows are convex combinations of true neighbor pairs", "[smote]") {
    const EncodedMatrix data = imbalanced(60, 15, 4, 11);
    SmoteConfig cfg;
    cfg.k = 5;
    cfg.seed = 13;
    const EncodedMatrix out = smote_oversample(data, cfg);
    for (std::size_t i = data.n(); i < out.n(); ++i) {
        CHECK(is_valid_interpolation(data, out.x, i, 1, cfg.k));
    }
}

TEST_CASE("synthetic rows stay inside the unit box", "[smote]") {
    const EncodedMatrix data = imbalanced(80, 20, 6, 17);
    SmoteConfig cfg;
    cfg.seed = 5;
    const EncodedMatrix out = smote_oversample(data, cfg);
    for (std::size_t i = data.n(); i < out.n(); ++i) {
        for (std::size_t j = 0; j < out.p(); ++j) {
            REQUIRE(out.x(i, j) >= 0.0);
            REQUIRE(out.x(i, j) <= 1.0);
        }
    }
}

TEST_CASE("smote leaves balanced or nearly balanced data alone", "[smote]") {
    const EncodedMatrix balanced = imbalanced(50, 50, 3, 1);
    SmoteConfig cfg;
    const EncodedMatrix out = smote_oversample(balanced, cfg);
    CHECK(out.n() == balanced.n());
    CHECK(out.x == balanced.x);

    SmoteConfig low;
    low.ratio = 0.2;  // ceil(0.2 * 60) = 12 <= 40 current minority rows
    const EncodedMatrix skewed = imbalanced(60, 40, 3, 2);
    CHECK(smote_oversample(skewed, low).n() == skewed.n());
}

TEST_CASE("smote can target the majority-labeled class when it is smaller", "[smote]") {
    // Class 1 outnumbers class 0, so class 0 is the minority here.
    const EncodedMatrix data = imbalanced(10, 90, 3, 21);
    SmoteConfig cfg;
    cfg.seed = 2;
    const EncodedMatrix out = smote_oversample(data, cfg);
    CHECK(out.count_class(0) == 90);
    CHECK(out.count_class(1) == 90);
    for (std::size_t i = data.n(); i < out.n(); ++i) CHECK(out.y[i] == 0);
}

TEST_CASE("smote validates configuration and data", "[smote]") {
    const EncodedMatrix data = imbalanced(20, 8, 3, 23);
    SmoteConfig bad_k;
    bad_k.k = 0;
    CHECK_THROWS_AS(smote_oversample(data, bad_k), ConfigError);

    SmoteConfig bad_ratio;
    bad_ratio.ratio = 0.0;
    CHECK_THROWS_AS(smote_oversample(data, bad_ratio), ConfigError);
    bad_ratio.ratio = 1.5;
    CHECK_THROWS_AS(smote_oversample(data, bad_ratio), ConfigError);

    const EncodedMatrix lone =
        testutil::make_encoded({{0.1}, {0.2}, {0.3}}, {0, 0, 1});
    CHECK_THROWS_AS(smote_oversample(lone, SmoteConfig{}), DataError);
}

TEST_CASE("smote is deterministic per seed", "[smote]") {
    const EncodedMatrix data = imbalanced(50, 20, 4, 31);
    SmoteConfig a;
    a.seed = 100;
    SmoteConfig b;
    b.seed = 101;
    const EncodedMatrix out1 = smote_oversample(data, a);
    const EncodedMatrix out2 = smote_oversample(data, a);
    const EncodedMatrix out3 = smote_oversample(data, b);
    CHECK(out1.x == out2.x);
    CHECK(out1.x != out3.x);
}

TEST_CASE("neighbor count clamps to the available minority pool", "[smote]") {
    // 3 minority rows leave only 2 candidate neighbors; k = 5 must still work.
    const EncodedMatrix data = imbalanced(30, 3, 3, 37);
    SmoteConfig cfg;
    cfg.k = 5;
    cfg.seed = 19;
    const EncodedMatrix out = smote_oversample(data, cfg);
    CHECK(out.count_class(1) == 30);
    for (std::size_t i = data.n(); i < out.n(); ++i) {
        CHECK(is_valid_interpolation(data, out.x, i, 1, cfg.k));
    }
}

TEST_CASE("nearest neighbor distance ties resolve toward the lower index", "[smote]") {
    // Three equidistant points around a seed: indices 1, 2, 3 all at the same
    // distance from index 0; k = 2 must select members 1 and 2.
    Matrix x(4, 2);
    x(0, 0) = 0.0;
    x(0, 1) = 0.0;
    x(1, 0) = 1.0;
    x(1, 1) = 0.0;
    x(2, 0) = 0.0;
    x(2, 1) = 1.0;
    x(3, 0) = -1.0;
    x(3, 1) = 0.0;
    const std::vector<std::size_t> members = {0, 1, 2, 3};
    const auto nn = smote_detail::k_nearest(x, members, 0, 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0] == 1);
    CHECK(nn[1] == 2);
}

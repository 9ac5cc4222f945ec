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
#include <numeric>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "crashml/core.hpp"

using namespace crashml;

TEST_CASE("rng reproduces the same stream for the same seed", "[core]") {
    Rng a(1234), b(1234), c(1235);
    bool all_equal = true, any_differ = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_differ = any_differ || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_differ);
}

TEST_CASE("uniform01 lies in [0,1) and open01 in (0,1)", "[core]") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double o = rng.open01();
        REQUIRE(o > 0.0);
        REQUIRE(o < 1.0);
    }
}

TEST_CASE("uniform_below stays below the bound and hits every value", "[core]") {
    Rng rng(11);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.uniform_below(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("shuffle permutes without losing elements", "[core]") {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    const std::vector<int> original = v;
    Rng rng(3);
    rng.shuffle(v);
    CHECK(v != original);  // 50! permutations; identity is effectively impossible
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == original);
}

TEST_CASE("shuffle is deterministic per seed", "[core]") {
    std::vector<int> a(20), b(20);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    Rng ra(99), rb(99);
    ra.shuffle(a);
    rb.shuffle(b);
    CHECK(a == b);
}

TEST_CASE("pick_weighted respects zero weights and rough proportions", "[core]") {
    Rng rng(5);
    std::vector<double> w = {0.0, 1.0, 3.0};
    std::size_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 40000; ++i) counts[rng.pick_weighted(w)]++;
    CHECK(counts[0] == 0);
    const double ratio = static_cast<double>(counts[2]) / static_cast<double>(counts[1]);
    CHECK(ratio > 2.7);
    CHECK(ratio < 3.3);
}

TEST_CASE("mix separates streams and is deterministic", "[core]") {
    const auto a = Rng::mix(42, 0);
    const auto b = Rng::mix(42, 1);
    const auto c = Rng::mix(43, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(a == Rng::mix(42, 0));
}

TEST_CASE("sigmoid hits the documented anchor points", "[core]") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(std::abs(sigmoid(-0.406) - 0.400) < 0.001);
    CHECK(sigmoid(1e6) == Catch::Approx(1.0));
    CHECK(sigmoid(-1e6) == Catch::Approx(0.0).margin(1e-12));
    CHECK(std::isfinite(sigmoid(1e6)));
    CHECK(std::isfinite(sigmoid(-1e6)));
    CHECK(sigmoid(-1e6) > 0.0);  // clamped, never exactly 0
    CHECK(sigmoid(1e6) < 1.0);
}

TEST_CASE("sigmoid is symmetric about one half", "[core]") {
    for (double m : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        CHECK(sigmoid(m) + sigmoid(-m) == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("log_loss_term is finite at probability extremes", "[core]") {
    CHECK(std::isfinite(log_loss_term(1.0, 0.0)));
    CHECK(std::isfinite(log_loss_term(0.0, 1.0)));
    CHECK(log_loss_term(1.0, 1.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(log_loss_term(1.0, 0.5) == Catch::Approx(std::log(2.0)));
}

TEST_CASE("mean and sample_std match hand values", "[core]") {
    const std::vector<double> v = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    CHECK(mean(v) == Catch::Approx(5.0));
    // Sample (n-1) standard deviation of the classic example set.
    CHECK(sample_std(v) == Catch::Approx(std::sqrt(32.0 / 7.0)));
}

TEST_CASE("matrix is row-major with span row access", "[core]") {
    Matrix m(2, 3);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = static_cast<double>(10 * i + j);
    }
    const auto r1 = m.row(1);
    REQUIRE(r1.size() == 3);
    CHECK(r1[0] == 10.0);
    CHECK(r1[2] == 12.0);
    CHECK(m.data().size() == 6);
    CHECK(m.data()[3] == 10.0);

    const Matrix copy = m;
    CHECK(copy == m);
}

TEST_CASE("log level comes from the environment once", "[core]") {
    // CRASHML_LOG is unset in the test harness: default threshold admits info.
    CHECK(log::threshold() <= log::Level::info);
}

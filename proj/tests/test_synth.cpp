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

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "crashml/csv.hpp"
#include "crashml/synth.hpp"
#include "crashml/table.hpp"
#include "helpers.hpp"

using namespace crashml;

TEST_CASE("generation is byte-stable per seed", "[synth]") {
    const TabularSchema schema = dhaka_raw_schema();
    const SignalSpec spec = default_signal();
    const std::string a = table_to_csv(generate_synthetic(schema, 200, 5, spec));
    const std::string b = table_to_csv(generate_synthetic(schema, 200, 5, spec));
    const std::string c = table_to_csv(generate_synthetic(schema, 200, 6, spec));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("generator refuses unusably small samples", "[synth]") {
    CHECK_THROWS_AS(generate_synthetic(dhaka_raw_schema(), 49, 1, default_signal()),
                    ConfigError);
    CHECK_NOTHROW(generate_synthetic(dhaka_raw_schema(), 50, 1, default_signal()));
}

TEST_CASE("every generated row conforms to the schema", "[synth]") {
    const RawTable t = generate_synthetic(dhaka_raw_schema(), 300, 11, default_signal());
    REQUIRE(t.rows.size() == 300);
    // clean() drops nothing: all cells typed, in range, and admissible.
    CHECK(clean(t).rows.size() == 300);

    const auto& schema = t.schema;
    for (std::size_t j = 0; j < schema.features.size(); ++j) {
        const ColumnSpec& col = schema.features[j];
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            if (col.kind == ColumnKind::numeric) {
                const double v = t.at(i, j).num();
                REQUIRE(v >= col.min_value);
                REQUIRE(v <= col.max_value);
                REQUIRE(v == std::floor(v));  // integer grid
            } else {
                REQUIRE(col.category_index(t.at(i, j).str()).has_value());
            }
        }
    }
}

TEST_CASE("weekend column is derived from the day column", "[synth]") {
    const RawTable t = generate_synthetic(dhaka_raw_schema(), 250, 3, default_signal());
    const auto day = t.schema.feature_index("Day of week");
    const auto wk = t.schema.feature_index("Weekend");
    REQUIRE(day.has_value());
    REQUIRE(wk.has_value());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const int code = static_cast<int>(t.at(i, *day).num());
        const bool weekend = code == 5 || code == 6;
        CHECK(t.at(i, *wk).num() == (weekend ? 1.0 : 0.0));
    }
}

TEST_CASE("realized fatality rate tracks the requested fraction", "[synth]") {
    SignalSpec spec = default_signal();
    spec.fatal_fraction = 1165.0 / 1700.0;
    const RawTable t = generate_synthetic(dhaka_raw_schema(), 1700, 42, spec);
    std::size_t fatal = 0;
    for (const auto& row : t.rows) fatal += row[t.target_column()].str() == "Fatal" ? 1 : 0;
    const double realized = static_cast<double>(fatal) / 1700.0;
    CHECK(std::abs(realized - spec.fatal_fraction) < 0.02);
}

TEST_CASE("severity targets favor Serious among survivable labels", "[synth]") {
    const RawTable t = generate_synthetic(dhaka_raw_schema(), 1500, 7, default_signal());
    std::size_t serious = 0, other_nonfatal = 0;
    for (const auto& row : t.rows) {
        const std::string& label = row[t.target_column()].str();
        if (label == "Fatal") continue;
        (label == "Serious" ? serious : other_nonfatal) += 1;
    }
    CHECK(serious > 0);
    CHECK(serious >= other_nonfatal * 10);
}

TEST_CASE("binary targets get the plain Non Fatal label", "[synth]") {
    const RawTable t = generate_synthetic(dhaka_schema(), 200, 9, default_signal());
    std::set<std::string> labels;
    for (const auto& row : t.rows) labels.insert(row[t.target_column()].str());
    for (const auto& label : labels) {
        CHECK((label == "Fatal" || label == "Non Fatal"));
    }
    CHECK(labels.count("Fatal") == 1);
}

TEST_CASE("signal spec validation catches bad declarations", "[synth]") {
    SignalSpec unknown;
    unknown.weights = {{"No Such Feature", 1.0}};
    CHECK_THROWS_AS(unknown.validate(dhaka_raw_schema()), ConfigError);

    SignalSpec bad_fraction = default_signal();
    bad_fraction.fatal_fraction = 1.0;
    CHECK_THROWS_AS(bad_fraction.validate(dhaka_raw_schema()), ConfigError);
    CHECK_THROWS_AS(generate_synthetic(dhaka_raw_schema(), 100, 1, bad_fraction), ConfigError);
}

TEST_CASE("ranking orders features by unsigned weight", "[synth]") {
    const std::vector<std::string> ranking = default_signal().ranking(dhaka_raw_schema());
    REQUIRE(ranking.size() == 7);
    CHECK(ranking[0] == "Casualty class");
    CHECK(ranking[1] == "Time");
    CHECK(ranking[2] == "Sub-district");  // negative weight still ranks by magnitude
    CHECK(ranking.back() == "Seat belt");
}

TEST_CASE("ground truth json records the generator configuration", "[synth]") {
    const SignalSpec spec = default_signal();
    const auto j = ground_truth_json(dhaka_raw_schema(), 1700, 42, spec);
    CHECK(j.at("seed").get<std::uint64_t>() == 42);
    CHECK(j.at("n").get<std::size_t>() == 1700);
    CHECK(j.at("weights").at("Casualty class").get<double>() == 12.0);
    CHECK(j.at("importance_ranking")[0].get<std::string>() == "Casualty class");
}

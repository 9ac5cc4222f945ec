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
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "crashml/crashml.hpp"
#include "helpers.hpp"

using Catch::Matchers::ContainsSubstring;
using crashml::Cell;
using crashml::ColumnSpec;
using crashml::ConfigError;
using crashml::DataError;
using crashml::EncodedMatrix;
using crashml::ExplainError;
using crashml::PreparedData;
using crashml::Preprocess;
using crashml::RawTable;
using crashml::RunConfig;
using crashml::TrainError;

namespace {

// 40 rows over the toy schema: hours sweep every residue mod 24, vehicles
// cycle Bus/Car/Truck, and 12 of the 40 rows are fatal.
RawTable toy_table() {
    RawTable t;
    t.schema = testutil::toy_schema();
    const std::vector<std::string> vehicles = {"Bus", "Car", "Truck"};
    for (int i = 0; i < 40; ++i) {
        const double hour = static_cast<double>((i * 7) % 24);
        const std::string label = (i % 10 < 3) ? "Fatal" : "Non Fatal";
        t.rows.push_back(testutil::toy_row(hour, vehicles[i % 3], label));
    }
    return t;
}

RunConfig toy_config() {
    RunConfig rc;
    rc.test_fraction = 0.25;
    rc.seed = 3;
    return rc;
}

}  // namespace

TEST_CASE("run config survives a JSON round trip and fills defaults", "[pipeline]") {
    RunConfig rc;
    rc.schema_path = "s.json";
    rc.data_path = "d.csv";
    rc.output_dir = "out";
    rc.seed = 7;
    rc.test_fraction = 0.3;
    rc.use_smote = false;
    rc.smote.k = 3;
    rc.smote.ratio = 0.5;
    rc.smote.seed = 9;
    rc.gbdt.n_trees = 10;
    rc.gbdt.learning_rate = 0.05;
    rc.cv_folds = 3;
    rc.rfe_step = 2;
    rc.rfe_min_features = 4;
    rc.feature_subset = {"a", "b"};
    rc.synth_rows = 100;
    rc.synth_fatal_fraction = 0.5;
    rc.emit_svg = false;

    const RunConfig back = crashml::run_config_from_json(crashml::run_config_to_json(rc));
    CHECK(back.schema_path == "s.json");
    CHECK(back.data_path == "d.csv");
    CHECK(back.output_dir == "out");
    CHECK(back.seed == 7);
    CHECK(back.test_fraction == 0.3);
    CHECK_FALSE(back.use_smote);
    CHECK(back.smote.k == 3);
    CHECK(back.smote.ratio == 0.5);
    CHECK(back.smote.seed == 9);
    CHECK(back.gbdt.n_trees == 10);
    CHECK(back.gbdt.learning_rate == 0.05);
    CHECK(back.cv_folds == 3);
    CHECK(back.rfe_step == 2);
    CHECK(back.rfe_min_features == 4);
    CHECK(back.feature_subset == std::vector<std::string>{"a", "b"});
    CHECK(back.synth_rows == 100);
    CHECK(back.synth_fatal_fraction == 0.5);
    CHECK_FALSE(back.emit_svg);

    SECTION("an empty object yields every default") {
        const RunConfig d = crashml::run_config_from_json(nlohmann::json::object());
        CHECK(d.schema_path.empty());
        CHECK(d.data_path.empty());
        CHECK(d.output_dir == ".");
        CHECK(d.seed == 42);
        CHECK(d.test_fraction == 0.2);
        CHECK(d.use_smote);
        CHECK(d.smote.k == 5);
        CHECK(d.smote.ratio == 1.0);
        CHECK(d.smote.seed == 0);
        CHECK(d.cv_folds == 5);
        CHECK(d.rfe_step == 1);
        CHECK(d.rfe_min_features == 1);
        CHECK(d.feature_subset.empty());
        CHECK(d.synth_rows == 1700);
        CHECK(d.synth_fatal_fraction == 1165.0 / 1700.0);
        CHECK(d.emit_svg);
    }

    SECTION("a partial object overrides only what it names") {
        const nlohmann::json j = {{"seed", 9}, {"smote", {{"k", 2}}}};
        const RunConfig part = crashml::run_config_from_json(j);
        CHECK(part.seed == 9);
        CHECK(part.smote.k == 2);
        CHECK(part.smote.ratio == 1.0);
        CHECK(part.test_fraction == 0.2);
    }
}

TEST_CASE("run config rejects malformed JSON values", "[pipeline]") {
    CHECK_THROWS_AS(crashml::run_config_from_json(nlohmann::json{{"test_fraction", "lots"}}),
                    ConfigError);
    CHECK_THROWS_WITH(crashml::run_config_from_json(nlohmann::json{{"test_fraction", "lots"}}),
                      ContainsSubstring("invalid run config"));
    CHECK_THROWS_AS(crashml::run_config_from_json(nlohmann::json{{"smote", {{"k", "three"}}}}),
                    ConfigError);
    CHECK_THROWS_AS(crashml::run_config_from_json(nlohmann::json{{"feature_subset", 7}}),
                    ConfigError);
}

TEST_CASE("run config validation rejects out-of-range knobs", "[pipeline]") {
    CHECK_NOTHROW(RunConfig{}.validate());

    RunConfig at_floor;
    at_floor.synth_rows = 50;
    CHECK_NOTHROW(at_floor.validate());

    auto broken = [](auto&& mutate) {
        RunConfig rc;
        mutate(rc);
        return rc;
    };
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.test_fraction = 0.0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.test_fraction = 1.0; }).validate(), ConfigError);
    CHECK_THROWS_WITH(broken([](RunConfig& rc) { rc.test_fraction = 1.0; }).validate(),
                      ContainsSubstring("test_fraction"));
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.cv_folds = 1; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.rfe_step = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.synth_rows = 49; }).validate(), ConfigError);
    // nested model and oversampling knobs are validated too
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.gbdt.n_trees = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](RunConfig& rc) { rc.smote.ratio = 0.0; }).validate(), ConfigError);
}

TEST_CASE("run_stage prefixes the stage name and keeps exception types", "[pipeline]") {
    CHECK(crashml::run_stage("ok", [] { return 42; }) == 42);

    bool ran = false;
    crashml::run_stage("side", [&] { ran = true; });
    CHECK(ran);

    CHECK_THROWS_AS(crashml::run_stage("a", []() -> int { throw ConfigError("bad knob"); }),
                    ConfigError);
    CHECK_THROWS_WITH(crashml::run_stage("a", []() -> int { throw ConfigError("bad knob"); }),
                      "stage a: bad knob");
    CHECK_THROWS_AS(crashml::run_stage("b", []() -> int { throw DataError("bad rows"); }),
                    DataError);
    CHECK_THROWS_WITH(crashml::run_stage("b", []() -> int { throw DataError("bad rows"); }),
                      "stage b: bad rows");
    CHECK_THROWS_AS(crashml::run_stage("c", []() -> int { throw TrainError("no signal"); }),
                    TrainError);
    CHECK_THROWS_WITH(crashml::run_stage("c", []() -> int { throw TrainError("no signal"); }),
                      "stage c: no signal");
    CHECK_THROWS_AS(crashml::run_stage("d", []() -> int { throw ExplainError("no paths"); }),
                    ExplainError);
    CHECK_THROWS_WITH(crashml::run_stage("d", []() -> int { throw ExplainError("no paths"); }),
                      "stage d: no paths");

    // foreign exceptions pass through without a prefix
    CHECK_THROWS_WITH(crashml::run_stage("e", []() -> int { throw std::runtime_error("plain"); }),
                      "plain");
}

TEST_CASE("preprocess sidecar survives a JSON round trip", "[pipeline]") {
    Preprocess pp;
    pp.feature_names = {"Time", "Vehicle"};
    pp.encoding_maps = {{}, {{"Bus", 0}, {"Car", 1}, {"Truck", 2}}};
    pp.scale_params = {{0.0, 23.0}, {0.0, 2.0}};
    pp.feature_subset = {"Vehicle"};

    const nlohmann::ordered_json j = crashml::preprocess_to_json(pp);
    CHECK(j.at("encoding_maps").size() == 2);
    CHECK(j.at("scale_params")[0].at("min") == 0.0);
    CHECK(j.at("scale_params")[1].at("max") == 2.0);

    const Preprocess back = crashml::preprocess_from_json(j);
    CHECK(back.feature_names == pp.feature_names);
    CHECK(back.encoding_maps == pp.encoding_maps);
    CHECK(back.scale_params == pp.scale_params);
    CHECK(back.feature_subset == pp.feature_subset);

    nlohmann::json missing = j;
    missing.erase("scale_params");
    CHECK_THROWS_AS(crashml::preprocess_from_json(missing), ConfigError);
    CHECK_THROWS_WITH(crashml::preprocess_from_json(missing),
                      ContainsSubstring("invalid preprocess sidecar"));
}

TEST_CASE("prepare splits, scales from the train side, and oversamples", "[pipeline]") {
    const RawTable raw = toy_table();
    const RunConfig rc = toy_config();
    const PreparedData out = crashml::prepare(raw, rc);

    // stratified at 0.25: round(12 * .25) = 3 fatal + round(28 * .25) = 7
    // non-fatal rows land in test, leaving 9/21 in train
    CHECK(out.test.n() == 10);
    CHECK(out.test.count_class(1) == 3);
    CHECK(out.train_minority_before == 9);

    // oversampling tops the minority up to the majority count
    CHECK(out.train_minority_after == 21);
    CHECK(out.train.n() == 42);
    CHECK(out.train.count_class(1) == 21);
    CHECK(out.train.count_class(0) == 21);

    // the toy schema has no "Day of week", so no derived columns appear
    CHECK(out.train.feature_names == std::vector<std::string>{"Time", "Vehicle"});
    CHECK(out.preprocess.feature_names == out.train.feature_names);
    CHECK(out.preprocess.scale_params.size() == 2);
    CHECK(out.preprocess.encoding_maps.size() == 2);
    CHECK(out.preprocess.encoding_maps[0].empty());
    CHECK(out.preprocess.encoding_maps[1] ==
          (std::map<std::string, int>{{"Bus", 0}, {"Car", 1}, {"Truck", 2}}));
    CHECK(out.preprocess.feature_subset.empty());

    // train is min-max scaled in place: each column spans exactly [0, 1], and
    // interpolated rows cannot escape the hull
    for (std::size_t j = 0; j < out.train.p(); ++j) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t i = 0; i < out.train.n(); ++i) {
            lo = std::min(lo, out.train.x(i, j));
            hi = std::max(hi, out.train.x(i, j));
        }
        CHECK(lo == 0.0);
        CHECK(hi == 1.0);
    }
    // the test side reuses train bounds and clamps
    for (std::size_t i = 0; i < out.test.n(); ++i) {
        for (std::size_t j = 0; j < out.test.p(); ++j) {
            CHECK(out.test.x(i, j) >= 0.0);
            CHECK(out.test.x(i, j) <= 1.0);
        }
    }

    SECTION("preparation is deterministic") {
        const PreparedData again = crashml::prepare(raw, rc);
        REQUIRE(again.train.n() == out.train.n());
        REQUIRE(again.test.n() == out.test.n());
        CHECK(again.train.y == out.train.y);
        CHECK(again.test.y == out.test.y);
        for (std::size_t i = 0; i < out.train.n(); ++i) {
            for (std::size_t j = 0; j < out.train.p(); ++j) {
                CHECK(again.train.x(i, j) == out.train.x(i, j));
            }
        }
        for (std::size_t i = 0; i < out.test.n(); ++i) {
            for (std::size_t j = 0; j < out.test.p(); ++j) {
                CHECK(again.test.x(i, j) == out.test.x(i, j));
            }
        }
    }
}

TEST_CASE("prepare without oversampling keeps the raw class balance", "[pipeline]") {
    RunConfig rc = toy_config();
    rc.use_smote = false;
    const PreparedData out = crashml::prepare(toy_table(), rc);
    CHECK(out.train.n() == 30);
    CHECK(out.train.count_class(1) == 9);
    CHECK(out.train_minority_before == 9);
    CHECK(out.train_minority_after == 9);
}

TEST_CASE("prepare honors a feature subset and records it pre-subset", "[pipeline]") {
    const RawTable raw = toy_table();

    RunConfig rc = toy_config();
    rc.feature_subset = {"Vehicle"};
    const PreparedData out = crashml::prepare(raw, rc);
    CHECK(out.train.p() == 1);
    CHECK(out.train.feature_names == std::vector<std::string>{"Vehicle"});
    CHECK(out.test.p() == 1);
    // the sidecar keeps the full pre-subset feature list plus the subset itself
    CHECK(out.preprocess.feature_names == std::vector<std::string>{"Time", "Vehicle"});
    CHECK(out.preprocess.feature_subset == std::vector<std::string>{"Vehicle"});

    SECTION("subset order dictates column order") {
        RunConfig swapped = toy_config();
        swapped.feature_subset = {"Vehicle", "Time"};
        const PreparedData s = crashml::prepare(raw, swapped);
        CHECK(s.train.feature_names == std::vector<std::string>{"Vehicle", "Time"});
    }

    SECTION("unknown names are rejected") {
        RunConfig bad = toy_config();
        bad.feature_subset = {"Bogus"};
        CHECK_THROWS_AS(crashml::prepare(raw, bad), ConfigError);
        CHECK_THROWS_WITH(crashml::prepare(raw, bad),
                          ContainsSubstring("stage subset") &&
                              ContainsSubstring("unknown feature 'Bogus'"));
    }
}

TEST_CASE("prepare derives weekend and time-of-day columns when available", "[pipeline]") {
    RawTable t;
    t.schema.features = {ColumnSpec::numeric("Day of week", 0, 6),
                         ColumnSpec::numeric("Time", 0, 23)};
    t.schema.target = ColumnSpec::ordinal("Accident Fatality", {"Non Fatal", "Fatal"});
    for (int i = 0; i < 60; ++i) {
        t.rows.push_back({Cell::number(i % 7), Cell::number((i * 5) % 24),
                          Cell::text(i % 3 == 0 ? "Fatal" : "Non Fatal")});
    }

    const RunConfig rc = toy_config();
    const PreparedData out = crashml::prepare(t, rc);
    CHECK(out.train.feature_names ==
          std::vector<std::string>{"Day of week", "Time", "Weekend", "Time of day"});
    CHECK(out.test.n() == 15);  // round(20 * .25) + round(40 * .25)

    // replaying the sidecar on the raw rows exposes the derived weekend flag:
    // both levels occur in train, so the stored bounds are (0, 1) and the
    // scaled value is the flag itself
    const EncodedMatrix m = crashml::prepare_with(t, out.preprocess);
    REQUIRE(m.n() == 60);
    REQUIRE(m.p() == 4);
    for (std::size_t i = 0; i < m.n(); ++i) {
        const int day = static_cast<int>(i) % 7;
        const bool weekend = std::find(t.schema.weekend_days.begin(), t.schema.weekend_days.end(),
                                       day) != t.schema.weekend_days.end();
        CHECK(m.x(i, 2) == (weekend ? 1.0 : 0.0));
    }
}

TEST_CASE("prepare_with reproduces the training transform on new rows", "[pipeline]") {
    const RawTable raw = toy_table();
    const PreparedData out = crashml::prepare(raw, toy_config());

    const EncodedMatrix m = crashml::prepare_with(raw, out.preprocess);
    REQUIRE(m.n() == 40);
    REQUIRE(m.p() == 2);
    CHECK(m.feature_names == out.preprocess.feature_names);

    const auto [tlo, thi] = out.preprocess.scale_params[0];
    const auto [vlo, vhi] = out.preprocess.scale_params[1];
    const std::vector<std::string> vehicles = {"Bus", "Car", "Truck"};
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(m.y[i] == (i % 10 < 3 ? 1 : 0));
        const double hour = static_cast<double>((i * 7) % 24);
        const double code = out.preprocess.encoding_maps[1].at(vehicles[i % 3]);
        CHECK(m.x(i, 0) == std::clamp((hour - tlo) / (thi - tlo), 0.0, 1.0));
        CHECK(m.x(i, 1) == std::clamp((code - vlo) / (vhi - vlo), 0.0, 1.0));
    }

    SECTION("the JSON sidecar replays identically") {
        const Preprocess pp =
            crashml::preprocess_from_json(crashml::preprocess_to_json(out.preprocess));
        const EncodedMatrix again = crashml::prepare_with(raw, pp);
        REQUIRE(again.n() == m.n());
        for (std::size_t i = 0; i < m.n(); ++i) {
            for (std::size_t j = 0; j < m.p(); ++j) CHECK(again.x(i, j) == m.x(i, j));
        }
    }

    SECTION("values beyond the stored bounds clamp to [0, 1]") {
        Preprocess pp = out.preprocess;
        pp.scale_params[0] = {5.0, 10.0};
        const EncodedMatrix clamped = crashml::prepare_with(raw, pp);
        CHECK(clamped.x(0, 0) == 0.0);  // hour 0 sits below the window
        CHECK(clamped.x(3, 0) == 1.0);  // hour 21 sits above it
    }

    SECTION("a stored subset is applied") {
        Preprocess pp = out.preprocess;
        pp.feature_subset = {"Time"};
        const EncodedMatrix sub = crashml::prepare_with(raw, pp);
        CHECK(sub.p() == 1);
        CHECK(sub.feature_names == std::vector<std::string>{"Time"});
    }

    SECTION("categories missing from the stored maps are an error") {
        Preprocess pp = out.preprocess;
        pp.encoding_maps[1].erase("Truck");
        CHECK_THROWS_AS(crashml::prepare_with(raw, pp), DataError);
        CHECK_THROWS_WITH(crashml::prepare_with(raw, pp),
                          ContainsSubstring("stage encode") &&
                              ContainsSubstring("unseen category 'Truck'"));
    }
}

TEST_CASE("empty schema path falls back to the built-in schema", "[pipeline]") {
    CHECK(crashml::load_schema_or_default("") == crashml::dhaka_raw_schema());

    const std::string dir = testutil::fresh_dir("schema");
    const std::string path = dir + "/toy_schema.json";
    crashml::save_schema(testutil::toy_schema(), path);
    CHECK(crashml::load_schema_or_default(path) == testutil::toy_schema());

    CHECK_THROWS_AS(crashml::load_schema_or_default(dir + "/absent.json"), ConfigError);
}

TEST_CASE("file helpers round trip and surface unusable paths", "[pipeline]") {
    const std::string dir = testutil::fresh_dir("pipeio");

    crashml::write_text_file(dir + "/note.txt", "hello\n");
    CHECK(testutil::slurp(dir + "/note.txt") == "hello\n");

    nlohmann::ordered_json j;
    j["alpha"] = 1;
    j["beta"] = {1, 2, 3};
    crashml::write_json_file(dir + "/obj.json", j);
    const nlohmann::json back = crashml::read_json_file(dir + "/obj.json");
    CHECK(back.at("alpha") == 1);
    CHECK(back.at("beta").size() == 3);
    CHECK(testutil::slurp(dir + "/obj.json").back() == '\n');

    CHECK_THROWS_AS(crashml::write_text_file(dir + "/no/such/sub/x.txt", "y"), ConfigError);
    CHECK_THROWS_WITH(crashml::write_text_file(dir + "/no/such/sub/x.txt", "y"),
                      ContainsSubstring("cannot open"));
    CHECK_THROWS_AS(crashml::read_json_file(dir + "/absent.json"), ConfigError);
    testutil::spit(dir + "/broken.json", "{ nope");
    CHECK_THROWS_AS(crashml::read_json_file(dir + "/broken.json"), ConfigError);
    CHECK_THROWS_WITH(crashml::read_json_file(dir + "/broken.json"),
                      ContainsSubstring("cannot parse"));
}

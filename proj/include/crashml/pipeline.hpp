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
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crashml/core.hpp"
#include "crashml/csv.hpp"
#include "crashml/encode.hpp"
#include "crashml/gbdt.hpp"
#include "crashml/schema.hpp"
#include "crashml/smote.hpp"
#include "crashml/synth.hpp"
#include "crashml/table.hpp"

namespace crashml {

// Everything a run needs, resolvable from a JSON config file with every field
// overridable by CLI flags. Seeds are always explicit — nothing falls back to
// the clock.
struct RunConfig {
    std::string schema_path;  // empty = built-in crash schema
    std::string data_path;
    std::string output_dir = ".";
    std::uint64_t seed = 42;
    double test_fraction = 0.2;
    bool use_smote = true;
    SmoteConfig smote;
    GbdtConfig gbdt;
    // feature selection
    std::size_t cv_folds = 5;
    std::size_t rfe_step = 1;
    std::size_t rfe_min_features = 1;
    std::vector<std::string> feature_subset;  // empty = all features
    // synth
    std::size_t synth_rows = 1700;
    double synth_fatal_fraction = 1165.0 / 1700.0;
    // emission
    bool emit_svg = true;

    void validate() const {
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
            throw ConfigError("config: test_fraction must lie in (0, 1)");
        }
        if (cv_folds < 2) throw ConfigError("config: cv_folds must be at least 2");
        if (rfe_step < 1) throw ConfigError("config: rfe_step must be at least 1");
        if (synth_rows < 50) throw ConfigError("config: synth_rows must be at least 50");
        gbdt.validate();
        smote.validate();
    }
};

inline nlohmann::ordered_json run_config_to_json(const RunConfig& rc) {
    nlohmann::ordered_json j;
    j["schema_path"] = rc.schema_path;
    j["data_path"] = rc.data_path;
    j["output_dir"] = rc.output_dir;
    j["seed"] = rc.seed;
    j["test_fraction"] = rc.test_fraction;
    j["use_smote"] = rc.use_smote;
    j["smote"] = {{"k", rc.smote.k}, {"ratio", rc.smote.ratio}, {"seed", rc.smote.seed}};
    j["gbdt"] = gbdt_config_to_json(rc.gbdt);
    j["cv_folds"] = rc.cv_folds;
    j["rfe_step"] = rc.rfe_step;
    j["rfe_min_features"] = rc.rfe_min_features;
    j["feature_subset"] = rc.feature_subset;
    j["synth_rows"] = rc.synth_rows;
    j["synth_fatal_fraction"] = rc.synth_fatal_fraction;
    j["emit_svg"] = rc.emit_svg;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig rc;
    try {
        if (j.contains("schema_path")) rc.schema_path = j.at("schema_path").get<std::string>();
        if (j.contains("data_path")) rc.data_path = j.at("data_path").get<std::string>();
        if (j.contains("output_dir")) rc.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("test_fraction")) rc.test_fraction = j.at("test_fraction").get<double>();
        if (j.contains("use_smote")) rc.use_smote = j.at("use_smote").get<bool>();
        if (j.contains("smote")) {
            const auto& s = j.at("smote");
            if (s.contains("k")) rc.smote.k = s.at("k").get<std::size_t>();
            if (s.contains("ratio")) rc.smote.ratio = s.at("ratio").get<double>();
            if (s.contains("seed")) rc.smote.seed = s.at("seed").get<std::uint64_t>();
        }
        if (j.contains("gbdt")) rc.gbdt = gbdt_config_from_json(j.at("gbdt"));
        if (j.contains("cv_folds")) rc.cv_folds = j.at("cv_folds").get<std::size_t>();
        if (j.contains("rfe_step")) rc.rfe_step = j.at("rfe_step").get<std::size_t>();
        if (j.contains("rfe_min_features")) {
            rc.rfe_min_features = j.at("rfe_min_features").get<std::size_t>();
        }
        if (j.contains("feature_subset")) {
            rc.feature_subset = j.at("feature_subset").get<std::vector<std::string>>();
        }
        if (j.contains("synth_rows")) rc.synth_rows = j.at("synth_rows").get<std::size_t>();
        if (j.contains("synth_fatal_fraction")) {
            rc.synth_fatal_fraction = j.at("synth_fatal_fraction").get<double>();
        }
        if (j.contains("emit_svg")) rc.emit_svg = j.at("emit_svg").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    return rc;
}

// Stage wrapper: failures carry the stage name, keeping their exception type
// (and therefore the exit code) intact.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("stage " + stage + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError("stage " + stage + ": " + e.what());
    } catch (const TrainError& e) {
        throw TrainError("stage " + stage + ": " + e.what());
    } catch (const ExplainError& e) {
        throw ExplainError("stage " + stage + ": " + e.what());
    }
}

// The training-time transforms needed to map new raw rows into model space:
// category codes, scaling parameters, and the retained feature subset.
struct Preprocess {
    std::vector<std::string> feature_names;               // post-encoding, pre-subset
    std::vector<std::map<std::string, int>> encoding_maps;
    std::vector<std::pair<double, double>> scale_params;
    std::vector<std::string> feature_subset;               // empty = all
};

inline nlohmann::ordered_json preprocess_to_json(const Preprocess& pp) {
    nlohmann::ordered_json j;
    j["feature_names"] = pp.feature_names;
    j["encoding_maps"] = nlohmann::ordered_json::array();
    for (const auto& m : pp.encoding_maps) {
        nlohmann::ordered_json mj = nlohmann::ordered_json::object();
        for (const auto& [cat, code] : m) mj[cat] = code;
        j["encoding_maps"].push_back(std::move(mj));
    }
    j["scale_params"] = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : pp.scale_params) {
        j["scale_params"].push_back({{"min", lo}, {"max", hi}});
    }
    j["feature_subset"] = pp.feature_subset;
    return j;
}

inline Preprocess preprocess_from_json(const nlohmann::json& j) {
    Preprocess pp;
    try {
        pp.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        for (const auto& mj : j.at("encoding_maps")) {
            std::map<std::string, int> m;
            for (auto it = mj.begin(); it != mj.end(); ++it) m[it.key()] = it.value().get<int>();
            pp.encoding_maps.push_back(std::move(m));
        }
        for (const auto& sj : j.at("scale_params")) {
            pp.scale_params.emplace_back(sj.at("min").get<double>(), sj.at("max").get<double>());
        }
        pp.feature_subset = j.at("feature_subset").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid preprocess sidecar: ") + e.what());
    }
    return pp;
}

struct PreparedData {
    EncodedMatrix train;  // scaled and (optionally) oversampled
    EncodedMatrix test;   // scaled with train parameters
    Preprocess preprocess;
    std::size_t train_minority_before = 0;
    std::size_t train_minority_after = 0;
};

namespace pipeline_detail {

inline EncodedMatrix apply_subset_by_names(const EncodedMatrix& m,
                                           const std::vector<std::string>& names) {
    if (names.empty()) return m;
    std::vector<std::size_t> idx;
    for (const std::string& name : names) {
        const auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
        if (it == m.feature_names.end()) {
            throw ConfigError("feature subset names unknown feature '" + name + "'");
        }
        idx.push_back(static_cast<std::size_t>(it - m.feature_names.begin()));
    }
    return subset_columns(m, idx);
}

}  // namespace pipeline_detail

// The full preprocessing pipeline, in fixed order: clean raw rows, derive
// Weekend/Time-of-day, binarize the target, encode, split stratified, scale
// with train-fitted bounds, then oversample the training side only.
inline PreparedData prepare(const RawTable& raw, const RunConfig& rc) {
    rc.validate();
    RawTable table = run_stage("clean", [&] { return clean(raw); });
    if (table.schema.feature_index("Day of week") && table.schema.feature_index("Time")) {
        table = run_stage("derive", [&] { return derive_features(table); });
    }
    table = run_stage("binarize", [&] { return binarize_target(table); });
    table = run_stage("clean", [&] { return clean(table); });
    EncodedMatrix all = run_stage("encode", [&] { return encode(table); });

    PreparedData out;
    auto [train, test] = run_stage("split", [&] {
        return stratified_split(all, rc.test_fraction, rc.seed);
    });

    run_stage("scale", [&] {
        train = scale_minmax(train);
        test = apply_scale(test, train.scale_params);
        return 0;
    });

    out.preprocess.feature_names = train.feature_names;
    out.preprocess.encoding_maps = train.encoding_maps;
    out.preprocess.scale_params = train.scale_params;
    out.preprocess.feature_subset = rc.feature_subset;

    train = run_stage("subset", [&] {
        return pipeline_detail::apply_subset_by_names(train, rc.feature_subset);
    });
    test = run_stage("subset", [&] {
        return pipeline_detail::apply_subset_by_names(test, rc.feature_subset);
    });

    const int minority = train.count_class(1) <= train.count_class(0) ? 1 : 0;
    out.train_minority_before = train.count_class(minority);
    if (rc.use_smote) {
        SmoteConfig sc = rc.smote;
        sc.seed = Rng::mix(rc.seed, 0x534d4f5445ull);  // dedicated oversampling stream
        train = run_stage("smote", [&] { return smote_oversample(train, sc); });
    }
    out.train_minority_after = train.count_class(minority);

    out.train = std::move(train);
    out.test = std::move(test);
    return out;
}

// Applies a stored preprocess sidecar to new raw data (clean/derive/binarize,
// stored category codes, stored scale bounds, stored subset).
inline EncodedMatrix prepare_with(const RawTable& raw, const Preprocess& pp) {
    RawTable table = run_stage("clean", [&] { return clean(raw); });
    if (table.schema.feature_index("Day of week") && table.schema.feature_index("Time")) {
        table = run_stage("derive", [&] { return derive_features(table); });
    }
    table = run_stage("binarize", [&] { return binarize_target(table); });
    table = run_stage("clean", [&] { return clean(table); });
    EncodedMatrix m = run_stage("encode", [&] {
        return encode_with_maps(table, pp.feature_names, pp.encoding_maps);
    });
    m = run_stage("scale", [&] { return apply_scale(m, pp.scale_params); });
    return run_stage("subset",
                     [&] { return pipeline_detail::apply_subset_by_names(m, pp.feature_subset); });
}

inline TabularSchema load_schema_or_default(const std::string& path) {
    if (path.empty()) return dhaka_raw_schema();
    return load_schema(path);
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out.good()) throw ConfigError("failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + e.what());
    }
    return j;
}

}  // namespace crashml

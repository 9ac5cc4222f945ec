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

// Command-line front door: synthesize data, train, evaluate, select features,
// explain, and compare models. Every run is pinned by an explicit seed; the
// same invocation always produces byte-identical artifacts.
//
// Exit codes: 0 success, 2 configuration, 3 data, 4 training, 5 explanation.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crashml/crashml.hpp"

namespace {

using namespace crashml;

namespace fs = std::filesystem;

// Guards an output directory against concurrent runs. Created O_EXCL so the
// second invocation fails fast; removed when the run ends either way.
class OutputLock {
public:
    explicit OutputLock(const std::string& dir) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output dir '" + dir + "': " + ec.message());
        path_ = (fs::path(dir) / ".crashml.lock").string();
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            throw ConfigError("output dir '" + dir + "' is locked by another run (remove '" +
                              path_ + "' if stale)");
        }
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;
    ~OutputLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::remove(path_.c_str());
        }
    }

private:
    std::string path_;
    int fd_ = -1;
};

// Everything the flags can set. Values land here; whether a flag was actually
// passed is read back from CLI11 so precedence stays flags > file > defaults.
struct CliOptions {
    std::string config_path;
    RunConfig flags;
    bool smote_on = true;
    bool svg_on = true;
    std::string growth;
    std::string model_path;
    std::string preprocess_path;
    std::string features_from;
    std::vector<std::string> dependence_features;
    std::vector<std::size_t> force_rows;
    std::size_t top_k = 10;
    std::size_t max_rows = 0;  // 0 = explain every row
    double threshold = 0.5;
};

void add_common_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--config", o.config_path,
                    "JSON run config; explicit flags override its fields");
    cmd->add_option("--schema", o.flags.schema_path,
                    "schema JSON (default: built-in crash schema)");
    cmd->add_option("-o,--output-dir", o.flags.output_dir,
                    "output directory, locked for the duration of the run");
    cmd->add_option("--seed", o.flags.seed, "master RNG seed (no wall-clock fallback)");
    cmd->add_flag("--svg,!--no-svg", o.svg_on, "emit SVG renderings of the JSON/CSV artifacts");
}

void add_data_option(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--data", o.flags.data_path, "input CSV matching the schema");
}

void add_gbdt_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--trees", o.flags.gbdt.n_trees, "boosting rounds");
    cmd->add_option("--learning-rate", o.flags.gbdt.learning_rate, "shrinkage per round");
    cmd->add_option("--growth", o.growth, "tree growth policy")
        ->check(CLI::IsMember({"leaf_wise", "level_wise"}));
    cmd->add_option("--max-leaves", o.flags.gbdt.max_leaves, "leaf cap (leaf_wise growth)");
    cmd->add_option("--max-depth", o.flags.gbdt.max_depth, "depth cap (level_wise growth)");
    cmd->add_option("--min-child-hessian", o.flags.gbdt.min_child_hessian,
                    "minimum hessian mass per child");
    cmd->add_option("--lambda-l2", o.flags.gbdt.lambda_l2, "L2 leaf regularization");
    cmd->add_option("--max-bins", o.flags.gbdt.max_bins, "histogram bins per feature");
}

void add_split_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--test-fraction", o.flags.test_fraction, "held-out fraction of rows");
    cmd->add_flag("--smote,!--no-smote", o.smote_on,
                  "oversample the minority class of the training split");
    cmd->add_option("--smote-k", o.flags.smote.k, "neighbors per synthetic draw");
    cmd->add_option("--smote-ratio", o.flags.smote.ratio,
                    "target minority/majority ratio after oversampling");
}

bool flag_passed(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

// Referenced paths must resolve before any work starts.
void require_readable(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    std::error_code ec;
    if (!fs::exists(path, ec) || fs::is_directory(path, ec)) {
        throw ConfigError(what + " path '" + path + "' does not resolve to a file");
    }
}

// flags > config file > defaults.
RunConfig resolve_config(const CLI::App* cmd, const CliOptions& o) {
    RunConfig rc;
    require_readable(o.config_path, "config");
    if (!o.config_path.empty()) rc = run_config_from_json(read_json_file(o.config_path));

    if (flag_passed(cmd, "--schema")) rc.schema_path = o.flags.schema_path;
    if (flag_passed(cmd, "--data")) rc.data_path = o.flags.data_path;
    if (flag_passed(cmd, "--output-dir")) rc.output_dir = o.flags.output_dir;
    if (flag_passed(cmd, "--seed")) rc.seed = o.flags.seed;
    if (flag_passed(cmd, "--test-fraction")) rc.test_fraction = o.flags.test_fraction;
    if (flag_passed(cmd, "--smote")) rc.use_smote = o.smote_on;
    if (flag_passed(cmd, "--smote-k")) rc.smote.k = o.flags.smote.k;
    if (flag_passed(cmd, "--smote-ratio")) rc.smote.ratio = o.flags.smote.ratio;
    if (flag_passed(cmd, "--trees")) rc.gbdt.n_trees = o.flags.gbdt.n_trees;
    if (flag_passed(cmd, "--learning-rate")) rc.gbdt.learning_rate = o.flags.gbdt.learning_rate;
    if (flag_passed(cmd, "--growth")) rc.gbdt.growth = growth_from_name(o.growth);
    if (flag_passed(cmd, "--max-leaves")) rc.gbdt.max_leaves = o.flags.gbdt.max_leaves;
    if (flag_passed(cmd, "--max-depth")) rc.gbdt.max_depth = o.flags.gbdt.max_depth;
    if (flag_passed(cmd, "--min-child-hessian")) {
        rc.gbdt.min_child_hessian = o.flags.gbdt.min_child_hessian;
    }
    if (flag_passed(cmd, "--lambda-l2")) rc.gbdt.lambda_l2 = o.flags.gbdt.lambda_l2;
    if (flag_passed(cmd, "--max-bins")) rc.gbdt.max_bins = o.flags.gbdt.max_bins;
    if (flag_passed(cmd, "--folds")) rc.cv_folds = o.flags.cv_folds;
    if (flag_passed(cmd, "--step")) rc.rfe_step = o.flags.rfe_step;
    if (flag_passed(cmd, "--min-features")) rc.rfe_min_features = o.flags.rfe_min_features;
    if (flag_passed(cmd, "--features")) rc.feature_subset = o.flags.feature_subset;
    if (flag_passed(cmd, "--rows")) rc.synth_rows = o.flags.synth_rows;
    if (flag_passed(cmd, "--fatal-fraction")) {
        rc.synth_fatal_fraction = o.flags.synth_fatal_fraction;
    }
    if (flag_passed(cmd, "--svg")) rc.emit_svg = o.svg_on;
    require_readable(rc.schema_path, "schema");
    return rc;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += sep;
        out += v[i];
    }
    return out;
}

std::string slug(const std::string& name) {
    std::string s;
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        s += std::isalnum(u) ? static_cast<char>(std::tolower(u)) : '_';
    }
    return s;
}

std::string out_path(const RunConfig& rc, const std::string& name) {
    return (fs::path(rc.output_dir) / name).string();
}

std::vector<std::string> read_feature_list(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    try {
        if (j.is_array()) return j.get<std::vector<std::string>>();
        return j.at("features").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("feature list '" + path + "' must be a JSON array or {\"features\": [...]}: " +
                          e.what());
    }
}

RawTable load_input(const RunConfig& rc, const TabularSchema& schema) {
    if (rc.data_path.empty()) {
        throw ConfigError("no input data: pass --data or set data_path in the config");
    }
    require_readable(rc.data_path, "data");
    return run_stage("load", [&] { return load_csv(rc.data_path, schema); });
}

void log_prepared(const PreparedData& pd, const RunConfig& rc) {
    log::info("split: train=" + std::to_string(pd.train.n()) + " rows, test=" +
              std::to_string(pd.test.n()) + " rows, features=" + std::to_string(pd.train.p()));
    log::info(std::string("smote: ") + (rc.use_smote ? "on" : "off") + ", minority " +
              std::to_string(pd.train_minority_before) + " -> " +
              std::to_string(pd.train_minority_after));
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

void run_synth(const CLI::App* cmd, const CliOptions& o) {
    const RunConfig rc = resolve_config(cmd, o);
    rc.validate();
    const TabularSchema schema = load_schema_or_default(rc.schema_path);
    SignalSpec spec = default_signal();
    spec.fatal_fraction = rc.synth_fatal_fraction;

    OutputLock lock(rc.output_dir);
    const RawTable table = run_stage("synth", [&] {
        return generate_synthetic(schema, rc.synth_rows, rc.seed, spec);
    });

    std::size_t fatal = 0;
    const std::size_t tcol = table.target_column();
    for (const auto& row : table.rows) fatal += row[tcol].str() == "Fatal" ? 1 : 0;

    save_csv(table, out_path(rc, "synthetic.csv"));
    write_json_file(out_path(rc, "ground_truth.json"),
                    ground_truth_json(schema, rc.synth_rows, rc.seed, spec));
    log::info("synth: " + std::to_string(table.rows.size()) + " rows (" + std::to_string(fatal) +
              " fatal), seed " + std::to_string(rc.seed) + " -> " + out_path(rc, "synthetic.csv"));
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void run_train(const CLI::App* cmd, const CliOptions& o) {
    RunConfig rc = resolve_config(cmd, o);
    if (!o.features_from.empty()) rc.feature_subset = read_feature_list(o.features_from);
    rc.validate();

    const TabularSchema schema = load_schema_or_default(rc.schema_path);
    const RawTable raw = load_input(rc, schema);

    OutputLock lock(rc.output_dir);
    const PreparedData pd = prepare(raw, rc);
    log_prepared(pd, rc);
    if (!rc.feature_subset.empty()) {
        log::info("training restricted to features: " + join(pd.train.feature_names, ", "));
    }

    const GbdtModel model = run_stage("fit", [&] { return fit_gbdt(pd.train, rc.gbdt); });

    save_model(model, out_path(rc, "model.json"));
    write_json_file(out_path(rc, "preprocess.json"), preprocess_to_json(pd.preprocess));
    write_json_file(out_path(rc, "run_config.json"), run_config_to_json(rc));

    const MetricsReport train_metrics = run_stage("evaluate", [&] {
        return full_metrics(pd.train.y, model.predict_probas(pd.train.x), o.threshold);
    });
    const MetricsReport test_metrics = run_stage("evaluate", [&] {
        return full_metrics(pd.test.y, model.predict_probas(pd.test.x), o.threshold);
    });
    write_json_file(out_path(rc, "metrics_train.json"), metrics_report_to_json(train_metrics));
    write_json_file(out_path(rc, "metrics_test.json"), metrics_report_to_json(test_metrics));
    write_text_file(out_path(rc, "roc_test.csv"), roc_curve_csv(test_metrics.curve));
    if (rc.emit_svg) {
        write_text_file(out_path(rc, "roc_test.svg"),
                        svg::roc_plot(test_metrics.curve, test_metrics.auc));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "train: test accuracy %.4f, test roc_auc %.4f",
                  test_metrics.report.accuracy, test_metrics.auc);
    log::info(buf);
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

std::string sibling_preprocess(const CliOptions& o) {
    if (!o.preprocess_path.empty()) return o.preprocess_path;
    if (o.model_path.empty()) throw ConfigError("--model is required");
    return (fs::path(o.model_path).parent_path() / "preprocess.json").string();
}

void run_evaluate(const CLI::App* cmd, const CliOptions& o) {
    const RunConfig rc = resolve_config(cmd, o);
    rc.validate();
    if (o.model_path.empty()) throw ConfigError("evaluate: --model is required");

    const GbdtModel model = run_stage("load-model", [&] { return load_model(o.model_path); });
    const Preprocess pp = run_stage("load-preprocess", [&] {
        return preprocess_from_json(read_json_file(sibling_preprocess(o)));
    });

    const TabularSchema schema = load_schema_or_default(rc.schema_path);
    const RawTable raw = load_input(rc, schema);
    const EncodedMatrix m = prepare_with(raw, pp);
    if (m.feature_names != model.feature_names) {
        throw DataError("evaluate: prepared features do not match the model (" +
                        join(m.feature_names, ",") + " vs " + join(model.feature_names, ","));
    }

    OutputLock lock(rc.output_dir);
    const MetricsReport metrics = run_stage("evaluate", [&] {
        return full_metrics(m.y, model.predict_probas(m.x), o.threshold);
    });
    write_json_file(out_path(rc, "metrics_eval.json"), metrics_report_to_json(metrics));
    write_text_file(out_path(rc, "roc_eval.csv"), roc_curve_csv(metrics.curve));
    if (rc.emit_svg) {
        write_text_file(out_path(rc, "roc_eval.svg"), svg::roc_plot(metrics.curve, metrics.auc));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "evaluate: n=%zu accuracy %.4f roc_auc %.4f", m.n(),
                  metrics.report.accuracy, metrics.auc);
    log::info(buf);
}

// ---------------------------------------------------------------------------
// rfecv
// ---------------------------------------------------------------------------

void run_rfecv(const CLI::App* cmd, const CliOptions& o) {
    const RunConfig rc = resolve_config(cmd, o);
    rc.validate();

    const TabularSchema schema = load_schema_or_default(rc.schema_path);
    const RawTable raw = load_input(rc, schema);

    OutputLock lock(rc.output_dir);
    RunConfig prep_rc = rc;
    prep_rc.use_smote = false;  // oversampling happens inside the folds only
    const PreparedData pd = prepare(raw, prep_rc);
    log_prepared(pd, prep_rc);

    SmoteConfig sc = rc.smote;
    sc.seed = Rng::mix(rc.seed, 0x534d4f5445ull);
    const std::size_t min_features = std::min(rc.rfe_min_features, pd.train.p());
    const ElimReport report = run_stage("rfecv", [&] {
        return shap_rfecv(pd.train, rc.gbdt, rc.cv_folds, rc.rfe_step, min_features, rc.seed,
                          rc.use_smote ? &sc : nullptr);
    });

    write_json_file(out_path(rc, "rfecv.json"), elim_report_to_json(report));
    write_text_file(out_path(rc, "rfecv.csv"), elim_report_csv(report));
    nlohmann::ordered_json best;
    best["feature_count"] = report.best_count;
    best["features"] = report.best_features;
    write_json_file(out_path(rc, "best_features.json"), best);
    if (rc.emit_svg) write_text_file(out_path(rc, "rfecv.svg"), svg::rfecv_curve(report));

    double best_auc = 0.0;
    for (const ElimStep& step : report.steps) {
        if (step.feature_count == report.best_count) best_auc = step.mean_auc;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "rfecv: %zu steps, best %zu features (mean cv roc_auc %.4f)",
                  report.steps.size(), report.best_count, best_auc);
    log::info(buf);
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

void run_explain(const CLI::App* cmd, const CliOptions& o) {
    const RunConfig rc = resolve_config(cmd, o);
    rc.validate();
    if (o.model_path.empty()) throw ConfigError("explain: --model is required");

    const GbdtModel model = run_stage("load-model", [&] { return load_model(o.model_path); });
    const Preprocess pp = run_stage("load-preprocess", [&] {
        return preprocess_from_json(read_json_file(sibling_preprocess(o)));
    });

    const TabularSchema schema = load_schema_or_default(rc.schema_path);
    const RawTable raw = load_input(rc, schema);
    EncodedMatrix m = prepare_with(raw, pp);
    if (m.feature_names != model.feature_names) {
        throw DataError("explain: prepared features do not match the model");
    }
    if (o.max_rows > 0 && o.max_rows < m.n()) {
        std::vector<std::size_t> keep(o.max_rows);
        std::iota(keep.begin(), keep.end(), std::size_t{0});
        m = subset_rows(m, keep);
    }

    OutputLock lock(rc.output_dir);
    const Explanation expl = run_stage("explain", [&] { return explain_set(model, m.x); });
    const auto importance = global_importance(expl);

    write_json_file(out_path(rc, "explanation.json"), explanation_to_json(expl));
    write_text_file(out_path(rc, "global_importance.csv"), global_importance_csv(importance));
    write_json_file(out_path(rc, "beeswarm.json"), beeswarm_json(expl, o.top_k));
    write_json_file(out_path(rc, "heatmap.json"), heatmap_json(expl));
    if (rc.emit_svg) {
        write_text_file(out_path(rc, "beeswarm.svg"), svg::beeswarm(expl, o.top_k));
        write_text_file(out_path(rc, "heatmap.svg"), svg::heatmap(expl, o.top_k));
    }

    // Dependence plots: requested features, or the top-ranked one by default.
    std::vector<std::string> dep_features = o.dependence_features;
    if (dep_features.empty() && !importance.empty()) dep_features.push_back(importance[0].first);
    for (const std::string& name : dep_features) {
        const auto it = std::find(expl.feature_names.begin(), expl.feature_names.end(), name);
        if (it == expl.feature_names.end()) {
            throw ConfigError("explain: unknown dependence feature '" + name + "'");
        }
        const auto j = static_cast<std::size_t>(it - expl.feature_names.begin());
        const DependenceData dep = dependence_data(expl, j);
        write_text_file(out_path(rc, "dependence_" + slug(name) + ".csv"),
                        dependence_csv(dep, expl));
        if (rc.emit_svg) {
            write_text_file(out_path(rc, "dependence_" + slug(name) + ".svg"),
                            svg::dependence(dep, expl));
        }
    }

    for (std::size_t row : o.force_rows) {
        if (row >= expl.n()) {
            throw ConfigError("explain: --force-rows index " + std::to_string(row) +
                              " out of range (explained " + std::to_string(expl.n()) + " rows)");
        }
        const ForceDecomposition fd = force_decomposition(expl, row, o.top_k);
        write_json_file(out_path(rc, "force_" + std::to_string(row) + ".json"), force_to_json(fd));
        if (rc.emit_svg) {
            write_text_file(out_path(rc, "force_" + std::to_string(row) + ".svg"), svg::force(fd));
        }
    }

    log::info("explain: " + std::to_string(expl.n()) + " rows, top feature '" +
              (importance.empty() ? std::string("-") : importance[0].first) + "'");
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct CvRow {
    std::string name;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double macro_f1 = 0.0;
    double auc = 0.0;
};

// One fit per fold per model; fold partitioning and oversampling seeds follow
// the library's cross-validation conventions.
template <typename FitPredict>
CvRow cv_row(const std::string& name, const EncodedMatrix& train, const KFoldSplit& plan,
             const SmoteConfig* oversample, double threshold, FitPredict&& fit_predict) {
    CvRow row;
    row.name = name;
    for (std::size_t f = 0; f < plan.k(); ++f) {
        EncodedMatrix fold_train = subset_rows(train, plan.train_of(f, train.n()));
        const EncodedMatrix fold_valid = subset_rows(train, plan.test_indices[f]);
        if (oversample) {
            SmoteConfig sc = *oversample;
            sc.seed = Rng::mix(sc.seed, f);
            fold_train = smote_oversample(fold_train, sc);
        }
        const std::vector<double> probs = fit_predict(fold_train, fold_valid);
        const MetricsReport mr = full_metrics(fold_valid.y, probs, threshold);
        row.accuracy += mr.report.accuracy;
        row.precision += mr.report.positive.precision.value;
        row.recall += mr.report.positive.recall.value;
        row.f1 += mr.report.positive.f1.value;
        row.macro_f1 += mr.report.macro_f1;
        row.auc += mr.auc;
    }
    const auto k = static_cast<double>(plan.k());
    row.accuracy /= k;
    row.precision /= k;
    row.recall /= k;
    row.f1 /= k;
    row.macro_f1 /= k;
    row.auc /= k;
    return row;
}

void run_report(const CLI::App* cmd, const CliOptions& o) {
    const RunConfig rc = resolve_config(cmd, o);
    rc.validate();

    const TabularSchema schema = load_schema_or_default(rc.schema_path);
    const RawTable raw = load_input(rc, schema);

    OutputLock lock(rc.output_dir);
    RunConfig prep_rc = rc;
    prep_rc.use_smote = false;  // oversampling happens inside the folds only
    const PreparedData pd = prepare(raw, prep_rc);
    log_prepared(pd, prep_rc);

    SmoteConfig sc = rc.smote;
    sc.seed = Rng::mix(rc.seed, 0x534d4f5445ull);
    const SmoteConfig* oversample = rc.use_smote ? &sc : nullptr;
    const KFoldSplit plan = stratified_kfold(pd.train.y, rc.cv_folds, rc.seed);

    GbdtConfig leaf_cfg = rc.gbdt;
    leaf_cfg.growth = Growth::leaf_wise;
    GbdtConfig level_cfg = rc.gbdt;
    level_cfg.growth = Growth::level_wise;

    std::vector<CvRow> rows;
    rows.push_back(cv_row("GBDT (leaf-wise)", pd.train, plan, oversample, o.threshold,
                          [&](const EncodedMatrix& ft, const EncodedMatrix& fv) {
                              return fit_gbdt(ft, leaf_cfg).predict_probas(fv.x);
                          }));
    rows.push_back(cv_row("GBDT (level-wise)", pd.train, plan, oversample, o.threshold,
                          [&](const EncodedMatrix& ft, const EncodedMatrix& fv) {
                              return fit_gbdt(ft, level_cfg).predict_probas(fv.x);
                          }));
    rows.push_back(cv_row("Logistic regression", pd.train, plan, oversample, o.threshold,
                          [&](const EncodedMatrix& ft, const EncodedMatrix& fv) {
                              return fit_logistic(ft).predict_probas(fv.x);
                          }));
    rows.push_back(cv_row("Gaussian naive Bayes", pd.train, plan, oversample, o.threshold,
                          [&](const EncodedMatrix& ft, const EncodedMatrix& fv) {
                              return fit_gnb(ft).predict_probas(fv.x);
                          }));

    char buf[256];
    std::string md = "# Model comparison\n\n";
    std::snprintf(buf, sizeof(buf),
                  "%zu-fold cross-validation on the training split (%zu rows, %zu features), "
                  "seed %llu, oversampling %s.\n\n",
                  rc.cv_folds, pd.train.n(), pd.train.p(),
                  static_cast<unsigned long long>(rc.seed), rc.use_smote ? "on" : "off");
    md += buf;
    md += "| Model | Accuracy | Precision | Recall | F1 | Macro F1 | ROC-AUC |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const CvRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "| %s | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f |\n",
                      r.name.c_str(), r.accuracy, r.precision, r.recall, r.f1, r.macro_f1, r.auc);
        md += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "\nPrecision, recall, and F1 score the Fatal class at threshold %.2f; every "
                  "value is the mean over validation folds.\n",
                  o.threshold);
    md += buf;

    write_text_file(out_path(rc, "comparison.md"), md);
    log::info("report: " + std::to_string(rows.size()) + " models -> " +
              out_path(rc, "comparison.md"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "crashml: interpretable crash-fatality modeling — synthesize, train, evaluate,\n"
        "select features, and explain, with fully seeded, byte-reproducible artifacts.\n"
        "Preprocessing order: clean, derive, binarize, encode, stratified split, min-max\n"
        "scale (bounds fitted on the training split only, applied to both sides),\n"
        "minority oversampling of the training split. Set CRASHML_LOG=debug|info|warn|error\n"
        "to control logging."};
    app.require_subcommand(1);

    CliOptions o;

    CLI::App* synth = app.add_subcommand("synth", "generate a seeded synthetic crash dataset");
    add_common_options(synth, o);
    synth->add_option("--rows", o.flags.synth_rows, "rows to generate");
    synth->add_option("--fatal-fraction", o.flags.synth_fatal_fraction,
                      "target fatal prevalence in (0, 1)");
    synth->callback([&] { run_synth(synth, o); });

    CLI::App* train = app.add_subcommand("train", "preprocess, fit, and evaluate a model");
    add_common_options(train, o);
    add_data_option(train, o);
    add_split_options(train, o);
    add_gbdt_options(train, o);
    train->add_option("--features", o.flags.feature_subset, "restrict training to these features")
        ->delimiter(',');
    train->add_option("--features-from", o.features_from,
                      "JSON feature list (e.g. best_features.json from rfecv)");
    train->add_option("--threshold", o.threshold, "probability threshold for hard labels");
    train->callback([&] { run_train(train, o); });

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score a saved model on a new data file");
    add_common_options(evaluate, o);
    add_data_option(evaluate, o);
    evaluate->add_option("--model", o.model_path, "model JSON written by train")->required();
    evaluate->add_option("--preprocess", o.preprocess_path,
                         "preprocess sidecar (default: next to the model)");
    evaluate->add_option("--threshold", o.threshold, "probability threshold for hard labels");
    evaluate->callback([&] { run_evaluate(evaluate, o); });

    CLI::App* rfecv = app.add_subcommand(
        "rfecv", "recursive feature elimination with cross-validated attribution");
    add_common_options(rfecv, o);
    add_data_option(rfecv, o);
    add_split_options(rfecv, o);
    add_gbdt_options(rfecv, o);
    rfecv->add_option("--folds", o.flags.cv_folds, "cross-validation folds");
    rfecv->add_option("--step", o.flags.rfe_step, "features removed per elimination round");
    rfecv->add_option("--min-features", o.flags.rfe_min_features, "stop at this many features");
    rfecv->callback([&] { run_rfecv(rfecv, o); });

    CLI::App* explain =
        app.add_subcommand("explain", "attribute a saved model's predictions per feature");
    add_common_options(explain, o);
    add_data_option(explain, o);
    explain->add_option("--model", o.model_path, "model JSON written by train")->required();
    explain->add_option("--preprocess", o.preprocess_path,
                        "preprocess sidecar (default: next to the model)");
    explain
        ->add_option("--features", o.dependence_features,
                     "features to emit dependence plots for (default: top-ranked)")
        ->delimiter(',');
    explain
        ->add_option("--force-rows", o.force_rows,
                     "row indices to emit force decompositions for")
        ->delimiter(',');
    explain->add_option("--top-k", o.top_k, "features shown individually in rankings");
    explain->add_option("--max-rows", o.max_rows, "explain only the first N rows (0 = all)");
    explain->callback([&] { run_explain(explain, o); });

    CLI::App* report =
        app.add_subcommand("report", "cross-validated comparison table across model families");
    add_common_options(report, o);
    add_data_option(report, o);
    add_split_options(report, o);
    add_gbdt_options(report, o);
    report->add_option("--folds", o.flags.cv_folds, "cross-validation folds");
    report->add_option("--threshold", o.threshold, "probability threshold for hard labels");
    report->callback([&] { run_report(report, o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        log::error(e.what());
        return 2;
    } catch (const DataError& e) {
        log::error(e.what());
        return 3;
    } catch (const TrainError& e) {
        log::error(e.what());
        return 4;
    } catch (const ExplainError& e) {
        log::error(e.what());
        return 5;
    } catch (const std::exception& e) {
        log::error(e.what());
        return 1;
    }
    return 0;
}

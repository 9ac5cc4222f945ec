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

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crashml/crashml.hpp"

namespace testutil {

inline crashml::EncodedMatrix make_encoded(const std::vector<std::vector<double>>& rows,
                                           const std::vector<int>& y,
                                           std::vector<std::string> names = {}) {
    crashml::EncodedMatrix m;
    const std::size_t n = rows.size();
    const std::size_t p = n > 0 ? rows[0].size() : 0;
    m.x = crashml::Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) m.x(i, j) = rows[i][j];
    }
    m.y = y;
    if (names.empty()) {
        for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
    }
    m.feature_names = std::move(names);
    m.encoding_maps.resize(p);
    return m;
}

// Uniform [0,1) feature matrix with labels from a simple linear logit,
// guaranteed to contain both classes.
inline crashml::EncodedMatrix random_classification(std::size_t n, std::size_t p,
                                                    std::uint64_t seed) {
    crashml::Rng rng(seed);
    crashml::EncodedMatrix m;
    m.x = crashml::Matrix(n, p);
    m.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            m.x(i, j) = rng.uniform01();
            z += (j % 2 == 0 ? 3.0 : -2.0) * (m.x(i, j) - 0.5);
        }
        m.y[i] = rng.uniform01() < crashml::sigmoid(z) ? 1 : 0;
    }
    m.y[0] = 0;
    m.y[n - 1] = 1;
    for (std::size_t j = 0; j < p; ++j) m.feature_names.push_back("f" + std::to_string(j));
    m.encoding_maps.resize(p);
    return m;
}

// O(n^2) pair-counting AUC with half credit for ties.
inline double brute_auc(const std::vector<int>& y, const std::vector<double>& s) {
    double num = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 1) {
            ++n_pos;
        } else {
            ++n_neg;
        }
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != 0) continue;
            if (s[i] > s[j]) {
                num += 1.0;
            } else if (s[i] == s[j]) {
                num += 0.5;
            }
        }
    }
    return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Small three-column schema for table-level tests: one numeric, one
// categorical, plus the binary target.
inline crashml::TabularSchema toy_schema() {
    crashml::TabularSchema s;
    s.features = {
        crashml::ColumnSpec::numeric("Time", 0, 23),
        crashml::ColumnSpec::categorical("Vehicle", {"Bus", "Car", "Truck"}),
    };
    s.target = crashml::ColumnSpec::ordinal("Accident Fatality", {"Non Fatal", "Fatal"});
    return s;
}

inline std::vector<crashml::Cell> toy_row(double time, const std::string& vehicle,
                                          const std::string& label) {
    return {crashml::Cell::number(time), crashml::Cell::text(vehicle),
            crashml::Cell::text(label)};
}

inline std::string fresh_dir(const std::string& hint) {
    namespace fs = std::filesystem;
    static std::atomic<int> counter{0};
    const fs::path d = fs::temp_directory_path() /
                       ("crashml_" + hint + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
    fs::create_directories(d);
    return d.string();
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline const char* cli_binary() { return std::getenv("CRASHML_CLI"); }

inline const char* data_dir() { return std::getenv("CRASHML_DATA_DIR"); }

// Runs the CLI with the given argument string; stdout/stderr are discarded
// unless an err_file is given for stderr. Returns the process exit code.
inline int run_cli(const std::string& args, const std::string& err_file = "") {
    const char* bin = cli_binary();
    if (bin == nullptr) return -1;
    std::string cmd = std::string("\"") + bin + "\" " + args + " >/dev/null 2>" +
                      (err_file.empty() ? std::string("/dev/null") : err_file);
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

}  // namespace testutil

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
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crashml {

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto process exit codes, the library
// throws them directly.
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExplainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Logging. Level comes from the CRASHML_LOG environment variable
// (debug|info|warn|error); everything goes to stderr.
// ---------------------------------------------------------------------------

namespace log {

enum class Level : int { debug = 0, info = 1, warn = 2, error = 3 };

inline Level& threshold() {
    static Level lvl = [] {
        const char* env = std::getenv("CRASHML_LOG");
        if (env == nullptr) return Level::info;
        const std::string s(env);
        if (s == "debug") return Level::debug;
        if (s == "warn") return Level::warn;
        if (s == "error") return Level::error;
        return Level::info;
    }();
    return lvl;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) < static_cast<int>(threshold())) return;
    std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void debug(const std::string& msg) { emit(Level::debug, "debug", msg); }
inline void info(const std::string& msg) { emit(Level::info, "info", msg); }
inline void warn(const std::string& msg) { emit(Level::warn, "warn", msg); }
inline void error(const std::string& msg) { emit(Level::error, "error", msg); }

}  // namespace log

// ---------------------------------------------------------------------------
// Dense row-major matrix of doubles. Minimal on purpose; everything in this
// library works on encoded numeric tables, not general linear algebra.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * cols_, cols_};
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 output is fully pinned by the standard; the
// distributions wrapped here are hand-rolled so streams do not depend on the
// standard library implementation.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw ConfigError("uniform_below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in the open interval (0, 1).
    double open01() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return u;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Index draw from an unnormalized weight vector.
    std::size_t pick_weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // splitmix64 finalizer; used to derive independent child seeds.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Small numeric helpers shared across modules.
// ---------------------------------------------------------------------------

// Margins are clamped before exponentiation so the probability stays in (0,1).
inline double sigmoid(double margin) {
    const double m = std::clamp(margin, -36.0, 36.0);
    return 1.0 / (1.0 + std::exp(-m));
}

inline double log_loss_term(double y, double p) {
    const double eps = 1e-15;
    const double q = std::clamp(p, eps, 1.0 - eps);
    return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace crashml

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

#include <cmath>
#include <string>
#include <vector>

#include "crashml/core.hpp"
#include "crashml/schema.hpp"

namespace crashml {

// A table cell is null, a number, or a text category.
class Cell {
public:
    enum class Type { null, number, text };

    Cell() = default;

    static Cell null() { return Cell(); }
    static Cell number(double v) {
        Cell c;
        c.type_ = Type::number;
        c.num_ = v;
        return c;
    }
    static Cell text(std::string v) {
        Cell c;
        c.type_ = Type::text;
        c.text_ = std::move(v);
        return c;
    }

    Type type() const { return type_; }
    bool is_null() const { return type_ == Type::null; }
    double num() const { return num_; }
    const std::string& str() const { return text_; }

    bool operator==(const Cell& other) const = default;

private:
    Type type_ = Type::null;
    double num_ = 0.0;
    std::string text_;
};

// Pre-encoding record set. Cell layout follows schema.columns(): feature
// columns in declared order, then the target.
struct RawTable {
    TabularSchema schema;
    std::vector<std::vector<Cell>> rows;

    std::size_t n_columns() const { return schema.features.size() + 1; }
    std::size_t target_column() const { return schema.features.size(); }

    const Cell& at(std::size_t row, std::size_t col) const { return rows[row][col]; }
};

namespace detail {

inline bool cell_violates_spec(const Cell& cell, const ColumnSpec& spec) {
    if (cell.is_null()) return true;
    if (spec.kind == ColumnKind::numeric) {
        if (cell.type() != Cell::Type::number) return true;
        if (!std::isfinite(cell.num())) return true;
        if (cell.num() < spec.min_value || cell.num() > spec.max_value) return true;
    } else {
        if (cell.type() != Cell::Type::text) return true;
    }
    return false;
}

}  // namespace detail

// Drops every row carrying a null cell. Numeric values outside the declared
// range count as null-bearing. Row order is preserved and the operation is
// idempotent.
inline RawTable clean(const RawTable& table) {
    RawTable out;
    out.schema = table.schema;
    const auto cols = table.schema.columns();
    for (const auto& row : table.rows) {
        bool drop = false;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            // Target columns are text; only feature specs get range checks.
            if (detail::cell_violates_spec(row[c], *cols[c])) {
                drop = true;
                break;
            }
        }
        if (!drop) out.rows.push_back(row);
    }
    if (out.rows.empty()) {
        throw DataError("clean: all rows eliminated, dataset is empty");
    }
    return out;
}

inline const std::vector<std::string>& time_of_day_categories() {
    static const std::vector<std::string> cats = {"night", "morning", "afternoon", "evening"};
    return cats;
}

inline std::string time_of_day_bucket(double hour) {
    if (hour < 6) return "night";
    if (hour < 12) return "morning";
    if (hour < 18) return "afternoon";
    return "evening";
}

// Sets the Weekend indicator from "Day of week" (weekend codes come from the
// schema) and buckets "Time" into an ordinal "Time of day" column. Existing
// Weekend / Time of day columns are overwritten, so the operation is
// idempotent.
inline RawTable derive_features(const RawTable& table) {
    const auto day_idx = table.schema.feature_index("Day of week");
    const auto time_idx = table.schema.feature_index("Time");
    if (!day_idx || !time_idx) {
        throw DataError("derive_features: requires 'Day of week' and 'Time' columns");
    }

    RawTable out;
    out.schema = table.schema;

    auto weekend_idx = out.schema.feature_index("Weekend");
    if (!weekend_idx) {
        out.schema.features.push_back(ColumnSpec::numeric("Weekend", 0, 1));
        weekend_idx = out.schema.features.size() - 1;
    }
    auto tod_idx = out.schema.feature_index("Time of day");
    if (!tod_idx) {
        out.schema.features.push_back(ColumnSpec::ordinal("Time of day", time_of_day_categories()));
        tod_idx = out.schema.features.size() - 1;
    }
    out.schema.validate();

    const std::size_t width = out.schema.features.size() + 1;
    const std::size_t old_target = table.schema.features.size();
    out.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<Cell> cells(width);
        for (std::size_t c = 0; c < table.schema.features.size(); ++c) cells[c] = row[c];
        cells[width - 1] = row[old_target];

        const Cell& day = row[*day_idx];
        if (day.type() == Cell::Type::number) {
            const int code = static_cast<int>(day.num());
            const bool weekend =
                std::find(out.schema.weekend_days.begin(), out.schema.weekend_days.end(), code) !=
                out.schema.weekend_days.end();
            cells[*weekend_idx] = Cell::number(weekend ? 1.0 : 0.0);
        } else {
            cells[*weekend_idx] = Cell::null();
        }

        const Cell& hour = row[*time_idx];
        if (hour.type() == Cell::Type::number) {
            cells[*tod_idx] = Cell::text(time_of_day_bucket(hour.num()));
        } else {
            cells[*tod_idx] = Cell::null();
        }
        out.rows.push_back(std::move(cells));
    }
    return out;
}

// Collapses the raw severity labels into the binary fatality target: Fatal
// stays Fatal, everything else that names a survivable outcome becomes
// Non Fatal. The target spec is rewritten to the two-level ordinal form.
inline RawTable binarize_target(const RawTable& table) {
    RawTable out;
    out.schema = table.schema;
    out.schema.target = ColumnSpec::ordinal(table.schema.target.name, {"Non Fatal", "Fatal"});
    out.schema.validate();

    const std::size_t tcol = table.target_column();
    out.rows = table.rows;
    for (auto& row : out.rows) {
        Cell& cell = row[tcol];
        if (cell.is_null()) continue;  // clean() owns null handling
        if (cell.type() != Cell::Type::text) {
            throw DataError("binarize_target: target cell is not text");
        }
        const std::string& v = cell.str();
        if (v == "Fatal") {
            cell = Cell::text("Fatal");
        } else if (v == "Serious" || v == "Slight" || v == "No Injury" || v == "Non Fatal") {
            cell = Cell::text("Non Fatal");
        } else {
            throw DataError("binarize_target: unknown severity value '" + v + "'");
        }
    }
    return out;
}

}  // namespace crashml

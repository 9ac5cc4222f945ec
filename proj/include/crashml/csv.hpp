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

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crashml/core.hpp"
#include "crashml/table.hpp"

namespace crashml {
namespace csv_detail {

// Splits one CSV record. Double quotes wrap fields containing commas or
// quotes; "" inside a quoted field is a literal quote.
inline std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string quote_field(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

inline bool parse_number(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

// Integral values print without a decimal point so CSV round-trips stay tidy.
inline std::string format_number(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace csv_detail

// Field formatting for modules that write their own CSV reports.
inline std::string csv_quote_field(const std::string& field) {
    return csv_detail::quote_field(field);
}
inline std::string csv_format_number(double v) { return csv_detail::format_number(v); }

// Reads a comma-separated UTF-8 file with a header row into the schema's
// column order (header order itself is free). Empty fields become null cells;
// numeric fields that fail to parse also become null cells and are left for
// clean() to drop.
inline RawTable load_csv(const std::string& path, const TabularSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("load_csv: " + path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = csv_detail::split_record(line);
    const auto cols = schema.columns();

    // header position per schema column
    std::vector<int> source_of(cols.size(), -1);
    for (std::size_t h = 0; h < header.size(); ++h) {
        bool known = false;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (header[h] == cols[c]->name) {
                if (source_of[c] != -1) {
                    throw DataError("load_csv: duplicate header column '" + header[h] + "'");
                }
                source_of[c] = static_cast<int>(h);
                known = true;
                break;
            }
        }
        if (!known) {
            throw DataError("load_csv: header column '" + header[h] + "' not in schema");
        }
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (source_of[c] == -1) {
            throw DataError("load_csv: header is missing column '" + cols[c]->name + "'");
        }
    }

    RawTable table;
    table.schema = schema;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv_detail::split_record(line);
        if (fields.size() != header.size()) {
            throw DataError("load_csv: line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        }
        std::vector<Cell> row(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::string& text = fields[static_cast<std::size_t>(source_of[c])];
            if (text.empty()) {
                row[c] = Cell::null();
            } else if (cols[c]->kind == ColumnKind::numeric) {
                double v;
                row[c] = csv_detail::parse_number(text, v) ? Cell::number(v) : Cell::null();
            } else {
                row[c] = Cell::text(text);
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline std::string table_to_csv(const RawTable& table) {
    std::ostringstream out;
    const auto cols = table.schema.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c > 0) out << ',';
        out << csv_detail::quote_field(cols[c]->name);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c > 0) out << ',';
            const Cell& cell = row[c];
            switch (cell.type()) {
                case Cell::Type::null: break;
                case Cell::Type::number: out << csv_detail::format_number(cell.num()); break;
                case Cell::Type::text: out << csv_detail::quote_field(cell.str()); break;
            }
        }
        out << '\n';
    }
    return out.str();
}

inline void save_csv(const RawTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_csv: cannot write " + path);
    out << table_to_csv(table);
}

}  // namespace crashml

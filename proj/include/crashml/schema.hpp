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

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashml/core.hpp"

namespace crashml {

enum class ColumnKind { numeric, categorical, ordinal };

inline std::string column_kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::ordinal: return "ordinal";
    }
    return "numeric";
}

inline ColumnKind column_kind_from_name(const std::string& name) {
    if (name == "numeric") return ColumnKind::numeric;
    if (name == "categorical") return ColumnKind::categorical;
    if (name == "ordinal") return ColumnKind::ordinal;
    throw ConfigError("unknown column kind: " + name);
}

// One declared column: either a numeric range or an admissible category list.
// Ordinal columns treat the declared category order as meaningful.
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<std::string> categories;  // categorical/ordinal only
    double min_value = 0.0;               // numeric only, inclusive
    double max_value = 0.0;

    static ColumnSpec numeric(std::string name, double lo, double hi) {
        ColumnSpec c;
        c.name = std::move(name);
        c.kind = ColumnKind::numeric;
        c.min_value = lo;
        c.max_value = hi;
        return c;
    }

    static ColumnSpec categorical(std::string name, std::vector<std::string> cats) {
        ColumnSpec c;
        c.name = std::move(name);
        c.kind = ColumnKind::categorical;
        c.categories = std::move(cats);
        return c;
    }

    static ColumnSpec ordinal(std::string name, std::vector<std::string> cats) {
        ColumnSpec c;
        c.name = std::move(name);
        c.kind = ColumnKind::ordinal;
        c.categories = std::move(cats);
        return c;
    }

    void validate() const {
        if (name.empty()) throw ConfigError("column spec with empty name");
        if (kind == ColumnKind::numeric) {
            if (!(min_value <= max_value)) {
                throw ConfigError("numeric column '" + name + "': lower bound above upper bound");
            }
        } else {
            if (categories.size() < 2) {
                throw ConfigError("column '" + name + "': needs at least 2 categories");
            }
            std::set<std::string> seen(categories.begin(), categories.end());
            if (seen.size() != categories.size()) {
                throw ConfigError("column '" + name + "': duplicate categories");
            }
        }
    }

    std::optional<int> category_index(const std::string& value) const {
        for (std::size_t i = 0; i < categories.size(); ++i) {
            if (categories[i] == value) return static_cast<int>(i);
        }
        return std::nullopt;
    }

    bool operator==(const ColumnSpec& other) const = default;
};

// Declared table layout: feature columns plus a single target column.
// weekend_days carries which day-of-week codes count as weekend (0=Sunday);
// the Bangladeshi weekend Friday/Saturday is the default.
struct TabularSchema {
    std::vector<ColumnSpec> features;
    ColumnSpec target;
    std::vector<int> weekend_days = {5, 6};

    void validate() const {
        std::set<std::string> names;
        for (const auto& f : features) {
            f.validate();
            if (!names.insert(f.name).second) {
                throw ConfigError("duplicate feature name: " + f.name);
            }
        }
        target.validate();
        if (names.count(target.name) > 0) {
            throw ConfigError("target name '" + target.name + "' is also a feature");
        }
        for (int d : weekend_days) {
            if (d < 0 || d > 6) throw ConfigError("weekend day code out of range");
        }
    }

    // Column order used by tables: features first, then the target.
    std::vector<const ColumnSpec*> columns() const {
        std::vector<const ColumnSpec*> cols;
        cols.reserve(features.size() + 1);
        for (const auto& f : features) cols.push_back(&f);
        cols.push_back(&target);
        return cols;
    }

    std::optional<std::size_t> feature_index(const std::string& name) const {
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (features[i].name == name) return i;
        }
        return std::nullopt;
    }

    bool operator==(const TabularSchema& other) const = default;
};

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json column_to_json(const ColumnSpec& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["kind"] = column_kind_name(c.kind);
    if (c.kind == ColumnKind::numeric) {
        j["range"] = {c.min_value, c.max_value};
    } else {
        j["categories"] = c.categories;
    }
    return j;
}

inline ColumnSpec column_from_json(const nlohmann::json& j) {
    ColumnSpec c;
    c.name = j.at("name").get<std::string>();
    c.kind = column_kind_from_name(j.at("kind").get<std::string>());
    if (c.kind == ColumnKind::numeric) {
        const auto& r = j.at("range");
        c.min_value = r.at(0).get<double>();
        c.max_value = r.at(1).get<double>();
    } else {
        c.categories = j.at("categories").get<std::vector<std::string>>();
    }
    c.validate();
    return c;
}

inline nlohmann::ordered_json schema_to_json(const TabularSchema& s) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["weekend_days"] = s.weekend_days;
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& f : s.features) j["features"].push_back(column_to_json(f));
    j["target"] = column_to_json(s.target);
    return j;
}

inline TabularSchema schema_from_json(const nlohmann::json& j) {
    TabularSchema s;
    if (j.contains("weekend_days")) {
        s.weekend_days = j.at("weekend_days").get<std::vector<int>>();
    }
    for (const auto& f : j.at("features")) s.features.push_back(column_from_json(f));
    s.target = column_from_json(j.at("target"));
    s.validate();
    return s;
}

inline void save_schema(const TabularSchema& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write schema file: " + path);
    out << schema_to_json(s).dump(2) << "\n";
}

inline TabularSchema load_schema(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("schema file " + path + " is not valid JSON: " + e.what());
    }
    return schema_from_json(j);
}

// ---------------------------------------------------------------------------
// Built-in Dhaka metropolitan traffic accident schema. The same layout ships
// as data/dhaka_schema_v1.json; a test pins the two together.
// ---------------------------------------------------------------------------

inline TabularSchema dhaka_schema() {
    TabularSchema s;
    s.features = {
        ColumnSpec::categorical(
            "Sub-district",
            {"Badda", "Cantonment", "Dhanmondi", "Gulshan", "Hatirjheel", "Jatrabari",
             "Kafrul", "Khilgaon", "Mirpur", "Mohammadpur", "Motijheel", "New Market",
             "Pallabi", "Ramna", "Sabujbagh", "Shahbagh", "Sher-e-Bangla Nagar",
             "Tejgaon", "Uttara", "Wari"}),
        ColumnSpec::categorical(
            "Traffic control",
            {"Police Controlled", "Uncontrolled", "Others", "Road Divider",
             "Police and Traffic Light", "Pedestrian Crossing", "Traffic Lights",
             "Traffic Sign"}),
        ColumnSpec::categorical(
            "Collision type",
            {"Hit Pedestrian", "Rear End", "Side Impact", "Direct Collision",
             "Hit Parked Vehicle", "Hit Object beside Road", "Hit Object on Road",
             "Overturned", "Right Angle", "Others"}),
        ColumnSpec::numeric("Day of week", 0, 6),
        ColumnSpec::numeric("Weekend", 0, 1),
        ColumnSpec::numeric("Time", 0, 23),
        ColumnSpec::numeric("Month", 0, 11),
        ColumnSpec::numeric("Year", 2017, 2022),
        ColumnSpec::numeric("Date in month", 0, 31),
        ColumnSpec::categorical("Road class", {"City", "National", "Regional", "Feeder", "Rural"}),
        ColumnSpec::categorical("Divider", {"Yes", "No"}),
        ColumnSpec::categorical(
            "Junction type",
            {"No Junction", "Cross Roads", "T-Junction", "Roundabout",
             "Staggered Junction", "Unknown", "Railway Crossing", "Others"}),
        ColumnSpec::categorical("Movement", {"One Way", "Two Way"}),
        ColumnSpec::categorical("Surface quality", {"Good", "Rough", "Under Maintenance"}),
        ColumnSpec::categorical(
            "Vehicle type",
            {"Bus", "Heavy Truck", "Others", "Minibus", "Car", "Motorcycle", "Pickup",
             "Microbus", "Mini Truck", "CNG", "Jeep", "Tempo", "Bicycle", "Rickshaw/Van",
             "Articulated Truck", "Tanker", "Handcart"}),
        ColumnSpec::categorical(
            "Vehicle damage",
            {"None", "Front", "Right", "Multiple", "Unknown", "Behind", "Left", "Roof"}),
        ColumnSpec::categorical(
            "Vehicle maneuver",
            {"Straight", "Overtaking", "Others", "Left-turn", "Transverse Crossing",
             "Right-turn", "Backward", "U-turn", "Brake/Slowing Down",
             "Sudden Acceleration", "Parked"}),
        ColumnSpec::categorical("Fitness certificate", {"Yes", "No", "Unknown"}),
        ColumnSpec::numeric("Driver age", 14, 80),
        ColumnSpec::categorical("Seat belt", {"Yes", "No"}),
        ColumnSpec::categorical("Light",
                                {"Daylight", "Illuminated at Night", "Twilight", "Unlit at Night"}),
        ColumnSpec::categorical("Weather", {"Good", "Rainy", "Fog", "Storm"}),
        ColumnSpec::ordinal(
            "Casualty class",
            {"Driver", "Pedestrian", "Passenger", "Driver and Passenger",
             "Driver and Pedestrian", "Passenger and Pedestrian", "All", "None"}),
        ColumnSpec::numeric("Total Casualties", 0, 17),
    };
    s.target = ColumnSpec::ordinal("Accident Fatality", {"Non Fatal", "Fatal"});
    s.validate();
    return s;
}

// Variant whose target still carries the raw four-level severity labels, the
// form synthetic CSV files are written in before target binarization.
inline TabularSchema dhaka_raw_schema() {
    TabularSchema s = dhaka_schema();
    s.target = ColumnSpec::ordinal("Accident Fatality",
                                   {"No Injury", "Slight", "Serious", "Fatal"});
    s.validate();
    return s;
}

}  // namespace crashml

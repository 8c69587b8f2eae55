#pragma once

// Feature configuration: how each raw feature is discretised into named levels.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpm/error.hpp"

namespace ctpm {

enum class Severity { very_low, low, normal, high, very_high, other };

enum class FeatureKind { continuous, discrete, categorical };

enum class RuleMethod { cutoffs, percentiles, custom_percentiles, categorical };

inline constexpr std::array<std::string_view, 6> kSeverityNames = {
    "very_low", "low", "normal", "high", "very_high", "other"};

inline std::string_view to_string(Severity s) { return kSeverityNames[static_cast<int>(s)]; }

inline Severity parse_severity(std::string_view text) {
    for (std::size_t i = 0; i < kSeverityNames.size(); ++i)
        if (kSeverityNames[i] == text) return static_cast<Severity>(i);
    throw ConfigError("unknown severity '" + std::string(text) + "'");
}

inline std::string_view to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::continuous: return "continuous";
        case FeatureKind::discrete: return "discrete";
        case FeatureKind::categorical: return "categorical";
    }
    return "";
}

inline std::string_view to_string(RuleMethod m) {
    switch (m) {
        case RuleMethod::cutoffs: return "cutoffs";
        case RuleMethod::percentiles: return "percentiles";
        case RuleMethod::custom_percentiles: return "custom_percentiles";
        case RuleMethod::categorical: return "categorical";
    }
    return "";
}

struct Level {
    std::string name;
    Severity severity = Severity::other;

    bool operator==(const Level&) const = default;
};

/// Discretisation rule for one feature.
///
/// `points` holds the cutoff upper bounds (cutoffs) or the percentile points
/// (percentiles, custom_percentiles); `levels` always has points.size() + 1
/// entries for those methods. Categorical rules map each category onto one
/// of `levels` by name.
struct AbstractionRule {
    RuleMethod method = RuleMethod::cutoffs;
    std::vector<double> points;
    std::vector<Level> levels;
    std::map<std::string, std::string> categories;

    const Level* find_level(std::string_view name) const {
        auto it = std::find_if(levels.begin(), levels.end(),
                               [&](const Level& l) { return l.name == name; });
        return it == levels.end() ? nullptr : &*it;
    }

    bool operator==(const AbstractionRule&) const = default;
};

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    AbstractionRule rule;
    std::optional<std::string> normal_level;

    bool operator==(const FeatureSpec&) const = default;
};

using FeatureConfig = std::vector<FeatureSpec>;

inline constexpr std::array<double, 4> kStandardPercentiles = {5.0, 25.0, 75.0, 95.0};

inline std::vector<Level> standard_percentile_levels() {
    return {{"Very low (VL)", Severity::very_low},
            {"Low (L)", Severity::low},
            {"Normal (N)", Severity::normal},
            {"High (H)", Severity::high},
            {"Very High (VH)", Severity::very_high}};
}

/// Body mass index cut-offs: <18.5, [18.5,25), [25,30), >=30.
inline FeatureSpec bmi_feature_spec(std::string name = "BMI") {
    FeatureSpec spec;
    spec.name = std::move(name);
    spec.kind = FeatureKind::continuous;
    spec.rule.method = RuleMethod::cutoffs;
    spec.rule.points = {18.5, 25.0, 30.0};
    spec.rule.levels = {{"Underweight", Severity::low},
                        {"Normal weight", Severity::normal},
                        {"Overweight", Severity::high},
                        {"Obese", Severity::very_high}};
    spec.normal_level = "Normal weight";
    return spec;
}

/// Generic five-level rule at the 5/25/75/95 percentiles.
inline FeatureSpec percentile_feature_spec(std::string name) {
    FeatureSpec spec;
    spec.name = std::move(name);
    spec.kind = FeatureKind::continuous;
    spec.rule.method = RuleMethod::percentiles;
    spec.rule.points.assign(kStandardPercentiles.begin(), kStandardPercentiles.end());
    spec.rule.levels = standard_percentile_levels();
    spec.normal_level = "Normal (N)";
    return spec;
}

/// Checks the rule invariants and applies normal_level to the level severities.
inline void validate(FeatureSpec& spec) {
    const auto where = "feature '" + spec.name + "': ";
    if (spec.name.empty()) throw ConfigError("feature with empty name");
    auto& rule = spec.rule;
    if (rule.levels.empty()) throw ConfigError(where + "no levels defined");

    std::set<std::string> names;
    for (const auto& l : rule.levels)
        if (!names.insert(l.name).second) throw ConfigError(where + "duplicate level '" + l.name + "'");

    switch (rule.method) {
        case RuleMethod::cutoffs:
            if (!std::is_sorted(rule.points.begin(), rule.points.end()) ||
                std::adjacent_find(rule.points.begin(), rule.points.end()) != rule.points.end())
                throw ConfigError(where + "cutoffs must be strictly increasing");
            break;
        case RuleMethod::percentiles:
            rule.points.assign(kStandardPercentiles.begin(), kStandardPercentiles.end());
            [[fallthrough]];
        case RuleMethod::custom_percentiles:
            for (std::size_t i = 0; i < rule.points.size(); ++i) {
                if (!(rule.points[i] > 0.0 && rule.points[i] < 100.0))
                    throw ConfigError(where + "percentile points must lie in (0,100)");
                if (i && !(rule.points[i] > rule.points[i - 1]))
                    throw ConfigError(where + "percentile points must be strictly increasing");
            }
            break;
        case RuleMethod::categorical:
            if (rule.categories.empty()) throw ConfigError(where + "categorical rule without categories");
            for (const auto& [cat, level] : rule.categories)
                if (!names.count(level))
                    throw ConfigError(where + "category '" + cat + "' maps to unknown level '" + level + "'");
            break;
    }
    if (rule.method != RuleMethod::categorical && rule.levels.size() != rule.points.size() + 1)
        throw ConfigError(where + "expected " + std::to_string(rule.points.size() + 1) + " levels, got " +
                          std::to_string(rule.levels.size()));
    if ((rule.method == RuleMethod::categorical) != (spec.kind == FeatureKind::categorical))
        throw ConfigError(where + "categorical kind and categorical method must go together");

    if (spec.normal_level) {
        auto it = std::find_if(rule.levels.begin(), rule.levels.end(),
                               [&](const Level& l) { return l.name == *spec.normal_level; });
        if (it == rule.levels.end())
            throw ConfigError(where + "normal_level '" + *spec.normal_level + "' is not a defined level");
        it->severity = Severity::normal;
    }
}

inline FeatureSpec feature_spec_from_json(const nlohmann::json& j) {
    FeatureSpec spec;
    try {
        spec.name = j.at("name").get<std::string>();
        const auto kind = j.value("kind", std::string("continuous"));
        if (kind == "continuous") spec.kind = FeatureKind::continuous;
        else if (kind == "discrete") spec.kind = FeatureKind::discrete;
        else if (kind == "categorical") spec.kind = FeatureKind::categorical;
        else throw ConfigError("feature '" + spec.name + "': unknown kind '" + kind + "'");

        const auto method = j.at("method").get<std::string>();
        if (method == "cutoffs") {
            spec.rule.method = RuleMethod::cutoffs;
            spec.rule.points = j.at("cutoffs").get<std::vector<double>>();
        } else if (method == "percentiles") {
            spec.rule.method = RuleMethod::percentiles;
        } else if (method == "custom_percentiles") {
            spec.rule.method = RuleMethod::custom_percentiles;
            spec.rule.points = j.at("percentiles").get<std::vector<double>>();
        } else if (method == "categorical") {
            spec.rule.method = RuleMethod::categorical;
            spec.rule.categories = j.at("categories").get<std::map<std::string, std::string>>();
        } else {
            throw ConfigError("feature '" + spec.name + "': unknown method '" + method + "'");
        }

        if (j.contains("levels")) {
            for (const auto& l : j.at("levels")) {
                Level level;
                level.name = l.at("name").get<std::string>();
                level.severity = parse_severity(l.value("severity", std::string("other")));
                spec.rule.levels.push_back(std::move(level));
            }
        } else if (spec.rule.method == RuleMethod::percentiles) {
            spec.rule.levels = standard_percentile_levels();
            spec.normal_level = "Normal (N)";
        }
        if (j.contains("normal_level") && !j.at("normal_level").is_null())
            spec.normal_level = j.at("normal_level").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("feature config: ") + e.what());
    }
    validate(spec);
    return spec;
}

inline nlohmann::json to_json(const FeatureSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["kind"] = std::string(to_string(spec.kind));
    j["method"] = std::string(to_string(spec.rule.method));
    switch (spec.rule.method) {
        case RuleMethod::cutoffs: j["cutoffs"] = spec.rule.points; break;
        case RuleMethod::percentiles: break;
        case RuleMethod::custom_percentiles: j["percentiles"] = spec.rule.points; break;
        case RuleMethod::categorical: j["categories"] = spec.rule.categories; break;
    }
    auto levels = nlohmann::json::array();
    for (const auto& l : spec.rule.levels)
        levels.push_back({{"name", l.name}, {"severity", std::string(to_string(l.severity))}});
    j["levels"] = std::move(levels);
    if (spec.normal_level) j["normal_level"] = *spec.normal_level;
    return j;
}

/// Parses a feature config document (a JSON array of feature objects).
inline FeatureConfig parse_feature_config(const nlohmann::json& doc) {
    if (!doc.is_array()) throw ConfigError("feature config must be a JSON array");
    FeatureConfig config;
    std::set<std::string> seen;
    for (const auto& item : doc) {
        auto spec = feature_spec_from_json(item);
        if (!seen.insert(spec.name).second) throw ConfigError("duplicate feature '" + spec.name + "'");
        config.push_back(std::move(spec));
    }
    return config;
}

inline nlohmann::json to_json(const FeatureConfig& config) {
    auto doc = nlohmann::json::array();
    for (const auto& spec : config) doc.push_back(to_json(spec));
    return doc;
}

inline const FeatureSpec* find_feature(const FeatureConfig& config, std::string_view name) {
    for (const auto& spec : config)
        if (spec.name == name) return &spec;
    return nullptr;
}

}  // namespace ctpm

#pragma once

// Endpoint representation of state intervals.
//
// Every non-normal interval [s, e] becomes a Start endpoint at wave s and a
// Finish endpoint at wave e. Endpoints at the same wave form one group. The
// order of endpoints inside a group carries no meaning; groups are kept in
// the canonical order Start block first, then Finish block, each sorted by
// (feature, level).

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpm/abstraction.hpp"
#include "ctpm/config.hpp"
#include "ctpm/error.hpp"

namespace ctpm {

enum class EndpointKind : std::uint8_t { Start = 0, Finish = 1 };

/// Interned (feature, level). Ids follow lexicographic (feature, level) order.
using SymbolId = std::uint32_t;

struct Symbol {
    std::string feature;
    std::string level;
    Severity severity = Severity::other;
};

class SymbolTable {
public:
    SymbolTable() = default;

    /// Builds a table over the given symbols; duplicates are collapsed.
    explicit SymbolTable(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
        std::sort(symbols_.begin(), symbols_.end(), [](const Symbol& a, const Symbol& b) {
            return std::tie(a.feature, a.level) < std::tie(b.feature, b.level);
        });
        symbols_.erase(std::unique(symbols_.begin(), symbols_.end(),
                                   [](const Symbol& a, const Symbol& b) {
                                       return a.feature == b.feature && a.level == b.level;
                                   }),
                       symbols_.end());
        for (SymbolId i = 0; i < symbols_.size(); ++i) index_[{symbols_[i].feature, symbols_[i].level}] = i;
    }

    std::size_t size() const noexcept { return symbols_.size(); }
    const Symbol& operator[](SymbolId id) const { return symbols_.at(id); }

    SymbolId id(const std::string& feature, const std::string& level) const {
        auto it = index_.find({feature, level});
        if (it == index_.end()) throw ValidationError("unknown state '" + feature + " - " + level + "'");
        return it->second;
    }

    bool contains(const std::string& feature, const std::string& level) const {
        return index_.count({feature, level}) != 0;
    }

private:
    std::vector<Symbol> symbols_;
    std::map<std::pair<std::string, std::string>, SymbolId> index_;
};

struct Endpoint {
    SymbolId symbol = 0;
    EndpointKind kind = EndpointKind::Start;

    bool is_start() const noexcept { return kind == EndpointKind::Start; }
    bool is_finish() const noexcept { return kind == EndpointKind::Finish; }

    /// Identity order: symbol first, Start before Finish.
    auto operator<=>(const Endpoint&) const = default;

    /// Dense index in [0, 2 * symbol count).
    std::uint32_t code() const noexcept { return symbol * 2 + static_cast<std::uint32_t>(kind); }
    static Endpoint from_code(std::uint32_t code) noexcept {
        return {code / 2, static_cast<EndpointKind>(code % 2)};
    }
};

inline Endpoint start_of(SymbolId s) { return {s, EndpointKind::Start}; }
inline Endpoint finish_of(SymbolId s) { return {s, EndpointKind::Finish}; }

/// Intra-group canonical order: Start block before Finish block.
struct GroupOrder {
    bool operator()(const Endpoint& a, const Endpoint& b) const noexcept {
        return std::tie(a.kind, a.symbol) < std::tie(b.kind, b.symbol);
    }
};

using EndpointSet = std::vector<Endpoint>;

inline void canonicalize(EndpointSet& group) {
    std::sort(group.begin(), group.end(), GroupOrder{});
    group.erase(std::unique(group.begin(), group.end()), group.end());
}

inline bool group_has(const EndpointSet& group, Endpoint e) {
    return std::find(group.begin(), group.end(), e) != group.end();
}

struct EndpointGroup {
    int time = 0;
    EndpointSet endpoints;

    bool operator==(const EndpointGroup&) const = default;
};

struct EndpointSequence {
    std::string patient_id;
    std::vector<EndpointGroup> groups;  ///< strictly increasing time
    SurvivalOutcome outcome;

    bool event() const noexcept { return outcome.event; }
    bool operator==(const EndpointSequence&) const = default;
};

/// Sweep per (feature, level): every Finish closes an open Start, no Start
/// opens twice, nothing is left open, and groups are canonical and ordered.
inline bool pairing_well_formed(const EndpointSequence& seq) {
    std::map<SymbolId, bool> open;
    int last_time = 0;
    bool first = true;
    for (const auto& g : seq.groups) {
        if (!first && g.time <= last_time) return false;
        if (g.endpoints.empty()) return false;
        first = false;
        last_time = g.time;
        auto copy = g.endpoints;
        canonicalize(copy);
        if (copy != g.endpoints) return false;
        for (const auto& e : g.endpoints) {  // Starts come first within a group
            bool& is_open = open[e.symbol];
            if (e.is_start()) {
                if (is_open) return false;
                is_open = true;
            } else {
                if (!is_open) return false;
                is_open = false;
            }
        }
    }
    return std::none_of(open.begin(), open.end(), [](const auto& kv) { return kv.second; });
}

/// Collects every (feature, level, severity) that survives normal-pruning.
inline SymbolTable symbols_for(const std::vector<PatientIntervals>& patients) {
    std::vector<Symbol> symbols;
    for (const auto& p : patients)
        for (const auto& iv : p.intervals)
            if (iv.level.severity != Severity::normal)
                symbols.push_back({iv.feature, iv.level.name, iv.level.severity});
    return SymbolTable(std::move(symbols));
}

/// Endpoint encoding with normal-pruning: intervals at a normal-severity
/// level emit nothing.
inline EndpointSequence encode(const PatientIntervals& patient, const SymbolTable& symbols) {
    std::map<int, EndpointSet> by_time;
    for (const auto& iv : patient.intervals) {
        if (iv.level.severity == Severity::normal) continue;
        if (iv.start > iv.end) throw ValidationError("interval with start after end for '" + patient.patient_id + "'");
        const SymbolId s = symbols.id(iv.feature, iv.level.name);
        by_time[iv.start].push_back(start_of(s));
        by_time[iv.end].push_back(finish_of(s));
    }
    EndpointSequence seq{patient.patient_id, {}, patient.outcome};
    for (auto& [time, eps] : by_time) {
        const auto before = eps.size();
        canonicalize(eps);
        if (eps.size() != before)
            throw ValidationError("overlapping intervals of one state for patient '" + patient.patient_id + "'");
        seq.groups.push_back({time, std::move(eps)});
    }
    if (!pairing_well_formed(seq))
        throw ValidationError("intervals of one state overlap for patient '" + patient.patient_id + "'");
    return seq;
}

/// Inverse of encode for the non-normal intervals, sorted by (feature, start).
inline std::vector<StateInterval> decode(const EndpointSequence& seq, const SymbolTable& symbols) {
    std::map<SymbolId, int> open;
    std::vector<StateInterval> out;
    for (const auto& g : seq.groups)
        for (const auto& e : g.endpoints) {
            if (e.is_start()) {
                open[e.symbol] = g.time;
            } else {
                const auto& sym = symbols[e.symbol];
                out.push_back({sym.feature, {sym.level, sym.severity}, open.at(e.symbol), g.time});
                open.erase(e.symbol);
            }
        }
    std::sort(out.begin(), out.end(), [](const StateInterval& a, const StateInterval& b) {
        return std::tie(a.feature, a.start) < std::tie(b.feature, b.start);
    });
    return out;
}

/// Sequences that share one immutable symbol table.
struct SequenceDatabase {
    SymbolTable symbols;
    std::vector<EndpointSequence> sequences;

    std::size_t size() const noexcept { return sequences.size(); }
    std::size_t event_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(sequences.begin(), sequences.end(),
                                                      [](const auto& s) { return s.event(); }));
    }
};

inline SequenceDatabase encode_cohort(const std::vector<PatientIntervals>& patients) {
    SequenceDatabase db;
    db.symbols = symbols_for(patients);
    db.sequences.reserve(patients.size());
    for (const auto& p : patients) db.sequences.push_back(encode(p, db.symbols));
    return db;
}

// ---- intervals file -------------------------------------------------------

inline nlohmann::json intervals_to_json(const AbstractedCohort& cohort) {
    nlohmann::json doc;
    doc["wave_count"] = cohort.wave_count;
    doc["warnings"] = cohort.warnings;
    auto patients = nlohmann::json::array();
    for (const auto& p : cohort.patients) {
        auto ivs = nlohmann::json::array();
        for (const auto& iv : p.intervals)
            ivs.push_back({{"feature", iv.feature},
                           {"level", iv.level.name},
                           {"severity", std::string(to_string(iv.level.severity))},
                           {"start", iv.start},
                           {"end", iv.end}});
        patients.push_back({{"patient_id", p.patient_id},
                            {"time", p.outcome.time},
                            {"event", p.outcome.event},
                            {"intervals", std::move(ivs)}});
    }
    doc["patients"] = std::move(patients);
    return doc;
}

inline AbstractedCohort intervals_from_json(const nlohmann::json& doc) {
    AbstractedCohort cohort;
    try {
        cohort.wave_count = doc.value("wave_count", 0);
        if (doc.contains("warnings")) cohort.warnings = doc.at("warnings").get<std::vector<std::string>>();
        for (const auto& p : doc.at("patients")) {
            PatientIntervals rec;
            rec.patient_id = p.at("patient_id").get<std::string>();
            rec.outcome.time = p.at("time").get<double>();
            rec.outcome.event = p.at("event").get<bool>();
            for (const auto& iv : p.at("intervals")) {
                StateInterval s;
                s.feature = iv.at("feature").get<std::string>();
                s.level.name = iv.at("level").get<std::string>();
                s.level.severity = parse_severity(iv.value("severity", std::string("other")));
                s.start = iv.at("start").get<int>();
                s.end = iv.at("end").get<int>();
                if (s.start > s.end || s.start < 1)
                    throw ValidationError("patient '" + rec.patient_id + "': bad interval bounds");
                rec.intervals.push_back(std::move(s));
            }
            cohort.patients.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("intervals file: ") + e.what());
    }
    return cohort;
}

}  // namespace ctpm

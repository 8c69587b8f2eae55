#pragma once

// Exhaustive reference miner for small databases.
//
// Grows patterns breadth-first over the full endpoint alphabet and scores
// every candidate by direct containment checks, with no projections, scan
// limits or support counting shortcuts. Growth rules are the miner's:
// first endpoint a Start, each step through accept_step().

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ctpm/miner.hpp"

namespace ctpm {

struct OracleGuard {
    std::size_t max_endpoints = 12;
    std::size_t max_patients = 25;
    std::size_t max_waves = 5;
};

inline void check_guard(const SequenceDatabase& db, const OracleGuard& guard = {}) {
    std::set<std::uint32_t> endpoints;
    std::set<int> waves;
    for (const auto& s : db.sequences)
        for (const auto& g : s.groups) {
            waves.insert(g.time);
            for (const auto& e : g.endpoints) endpoints.insert(e.code());
        }
    if (endpoints.size() > guard.max_endpoints)
        throw GuardError("oracle refuses " + std::to_string(endpoints.size()) + " distinct endpoints");
    if (db.size() > guard.max_patients) throw GuardError("oracle refuses " + std::to_string(db.size()) + " patients");
    if (waves.size() > guard.max_waves) throw GuardError("oracle refuses " + std::to_string(waves.size()) + " waves");
}

inline std::vector<PatternResult> brute_force_mine(const SequenceDatabase& db, const MinerConfig& cfg,
                                                   const OracleGuard& guard = {}) {
    cfg.validate();
    check_guard(db, guard);
    detail::check_database(db);

    std::set<Endpoint> alphabet;
    for (const auto& s : db.sequences)
        for (const auto& g : s.groups) alphabet.insert(g.endpoints.begin(), g.endpoints.end());

    struct Node {
        TemporalPattern pattern;
        double risk;
    };
    std::map<std::string, Node> reached;  // canonical key -> accepted node
    std::vector<Node> frontier;

    auto try_child = [&](TemporalPattern child, std::optional<double> parent_risk, Endpoint appended,
                         std::vector<Node>& next) {
        child = canonical(child);
        if (!well_formed(child)) return;
        if (cfg.max_length && child.length() > *cfg.max_length) return;
        const auto stats = count_by_containment(db, child);
        const auto r = accept_step(stats, parent_risk, appended, cfg);
        if (!r) return;
        const auto key = canonical_key(child, db.symbols);
        if (reached.count(key)) return;
        reached.emplace(key, Node{child, *r});
        next.push_back({std::move(child), *r});
    };

    for (const auto& e : alphabet) {
        if (!e.is_start()) continue;
        try_child(TemporalPattern{{{e}}}, std::nullopt, e, frontier);
    }
    while (!frontier.empty()) {
        std::vector<Node> next;
        for (const auto& node : frontier)
            for (const auto& e : alphabet) {
                auto same = node.pattern;
                if (!group_has(same.groups.back(), e)) {
                    same.groups.back().push_back(e);
                    try_child(std::move(same), node.risk, e, next);
                }
                auto later = node.pattern;
                later.groups.push_back({e});
                try_child(std::move(later), node.risk, e, next);
            }
        frontier = std::move(next);
    }

    std::vector<PatternResult> results;
    for (const auto& [key, node] : reached) {
        if (!node.pattern.closed()) continue;
        PatternResult res;
        res.pattern = node.pattern;
        res.key = key;
        res.stats = count_by_containment(db, node.pattern, &res.patients);
        res.risk = node.risk;
        res.rr = relative_risk(res.stats);
        res.odds = odds_ratio(res.stats);
        results.push_back(std::move(res));
    }
    detail::sort_results(results);
    return results;
}

}  // namespace ctpm

#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpm/encoding.hpp"

namespace ctpm {

/// Ordered endpoint groups with relative positions only.
struct TemporalPattern {
    std::vector<EndpointSet> groups;

    bool empty() const noexcept { return groups.empty(); }

    /// Number of endpoints.
    std::size_t length() const noexcept {
        std::size_t n = 0;
        for (const auto& g : groups) n += g.size();
        return n;
    }

    /// Symbols opened and not yet finished, in order of the sweep.
    std::vector<SymbolId> open_starts() const {
        std::vector<SymbolId> open;
        for (const auto& g : groups) {
            auto sorted = g;
            canonicalize(sorted);
            for (const auto& e : sorted) {
                if (e.is_start()) {
                    open.push_back(e.symbol);
                } else if (auto it = std::find(open.begin(), open.end(), e.symbol); it != open.end()) {
                    open.erase(it);
                }
            }
        }
        return open;
    }

    /// Every Start has its matching Finish.
    bool closed() const { return open_starts().empty(); }

    bool operator==(const TemporalPattern&) const = default;
};

/// No empty groups, no duplicates in a group, every Finish closes an open
/// Start and no state is opened twice at once.
inline bool well_formed(const TemporalPattern& p) {
    std::set<SymbolId> open;
    for (const auto& g : p.groups) {
        if (g.empty()) return false;
        auto sorted = g;
        canonicalize(sorted);
        if (sorted.size() != g.size()) return false;
        for (const auto& e : sorted) {
            if (e.is_start()) {
                if (!open.insert(e.symbol).second) return false;
            } else if (!open.erase(e.symbol)) {
                return false;
            }
        }
    }
    return true;
}

inline TemporalPattern canonical(TemporalPattern p) {
    for (auto& g : p.groups) canonicalize(g);
    return p;
}

/// Structural order on canonical forms; consistent with canonical_key order
/// only within one symbol table.
inline bool canonical_less(const TemporalPattern& a, const TemporalPattern& b) {
    const auto ca = canonical(a);
    const auto cb = canonical(b);
    return std::lexicographical_compare(
        ca.groups.begin(), ca.groups.end(), cb.groups.begin(), cb.groups.end(),
        [](const EndpointSet& x, const EndpointSet& y) {
            return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(), GroupOrder{});
        });
}

namespace detail {
inline void append_escaped(std::string& out, const std::string& text) {
    for (char ch : text) {
        if (ch == '\\' || ch == '=' || ch == ',' || ch == '(' || ch == ')') out.push_back('\\');
        out.push_back(ch);
    }
}
}  // namespace detail

inline std::string endpoint_text(const Endpoint& e, const SymbolTable& symbols) {
    std::string out;
    detail::append_escaped(out, symbols[e.symbol].feature);
    out.push_back('=');
    detail::append_escaped(out, symbols[e.symbol].level);
    out.push_back(e.is_start() ? '+' : '-');
    return out;
}

/// Text key identifying a pattern up to the order of simultaneous endpoints,
/// e.g. `(A=high+) (B=low+,A=high-) (B=low-)`.
inline std::string canonical_key(const TemporalPattern& pattern, const SymbolTable& symbols) {
    std::string key;
    for (const auto& group : canonical(pattern).groups) {
        if (!key.empty()) key.push_back(' ');
        key.push_back('(');
        for (std::size_t i = 0; i < group.size(); ++i) {
            if (i) key.push_back(',');
            key += endpoint_text(group[i], symbols);
        }
        key.push_back(')');
    }
    return key;
}

inline nlohmann::json pattern_groups_to_json(const TemporalPattern& pattern, const SymbolTable& symbols) {
    auto groups = nlohmann::json::array();
    for (const auto& group : canonical(pattern).groups) {
        auto g = nlohmann::json::array();
        for (const auto& e : group) {
            const auto& sym = symbols[e.symbol];
            g.push_back({{"feature", sym.feature},
                         {"level", sym.level},
                         {"kind", e.is_start() ? "start" : "finish"},
                         {"severity", std::string(to_string(sym.severity))}});
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace ctpm

#pragma once

// Projection-based mining of high-risk temporal patterns over endpoint
// sequences.
//
// A prefix is grown one endpoint at a time, either into its last group
// (simultaneous with it) or as a new, strictly later group. Each projected
// database stores, per patient, the data groups at which the prefix can end
// ("states") as indices into the shared sequence store; nothing is copied.
//
// Pruning:
//  - scan:     a state only looks ahead to the first Finish of a state the
//              prefix still holds open (its `stop` group);
//  - point:    Finish candidates are kept only when their Start is open;
//  - postfix:  Finishes of states that are not open are invisible;
//  - risk:     a step must pass support and risk thresholds and raise the
//              risk of its parent (closing Finishes may keep it equal);
//  - normal:   applied earlier, in encode();
//  - duplicate: permutations of one group collapse to a single node.
//
// An open Start only counts as matched while its data interval is still
// running at the prefix's last group, so every counted embedding of an open
// prefix can still be closed.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "ctpm/encoding.hpp"
#include "ctpm/error.hpp"
#include "ctpm/pattern.hpp"
#include "ctpm/risk.hpp"

namespace ctpm {

enum class MinsupScope { event_group, population };

inline std::string to_string(MinsupScope s) { return s == MinsupScope::event_group ? "event_group" : "population"; }

inline MinsupScope parse_minsup_scope(const std::string& text) {
    if (text == "event_group" || text == "event") return MinsupScope::event_group;
    if (text == "population") return MinsupScope::population;
    throw ConfigError("minsup scope must be 'event_group' or 'population', got '" + text + "'");
}

struct MinerConfig {
    double minsup = 0.05;
    MinsupScope minsup_scope = MinsupScope::event_group;
    double risk_threshold = 1.5;
    RiskMeasure measure = RiskMeasure::relative_risk;
    std::optional<std::size_t> max_length;  ///< in endpoints
    unsigned workers = 1;

    void validate() const {
        if (!(minsup > 0.0 && minsup <= 1.0)) throw ConfigError("minsup must lie in (0, 1]");
        if (!(risk_threshold > 0.0)) throw ConfigError("risk threshold must be > 0");
        if (workers == 0) throw ConfigError("workers must be >= 1");
        if (max_length && *max_length == 0) throw ConfigError("max length must be >= 1");
    }
};

struct PatternResult {
    TemporalPattern pattern;  ///< canonical, closed
    std::string key;
    RiskStats stats;
    double risk = 0.0;  ///< in the configured measure
    double rr = 0.0;
    double odds = 0.0;
    std::vector<std::uint32_t> patients;  ///< indices into the database, ascending
};

namespace detail {

inline double scoped_support(const RiskStats& s, MinsupScope scope) {
    return scope == MinsupScope::event_group ? s.support_event() : s.support_pop();
}

}  // namespace detail

/// Risk of a growth step, or nothing if the step is pruned. `parent_risk` is
/// empty for a first endpoint.
inline std::optional<double> accept_step(const RiskStats& stats, std::optional<double> parent_risk, Endpoint appended,
                                         const MinerConfig& cfg) {
    if (!(detail::scoped_support(stats, cfg.minsup_scope) > cfg.minsup)) return std::nullopt;
    if (!stats.risk_defined()) return std::nullopt;
    const double r = risk(stats, cfg.measure);
    if (!(r > cfg.risk_threshold)) return std::nullopt;
    if (parent_risk) {
        if (appended.is_start() && !(r > *parent_risk)) return std::nullopt;
        if (appended.is_finish() && r < *parent_risk) return std::nullopt;
    }
    return r;
}

/// Keeps Starts, and Finishes whose Start is open in the prefix.
inline std::vector<Endpoint> point_prune(const std::vector<Endpoint>& candidates, const std::vector<SymbolId>& open) {
    std::vector<Endpoint> kept;
    for (const auto& e : candidates)
        if (e.is_start() || std::find(open.begin(), open.end(), e.symbol) != open.end()) kept.push_back(e);
    return kept;
}

// ---- containment ----------------------------------------------------------

namespace detail {

/// Time of the Finish closing the interval of `symbol` that starts at `start`.
inline int interval_end(const EndpointSequence& seq, SymbolId symbol, int start) {
    for (const auto& g : seq.groups)
        if (g.time >= start && group_has(g.endpoints, finish_of(symbol))) return g.time;
    return std::numeric_limits<int>::max();
}

inline bool embed(const EndpointSequence& seq, const std::vector<EndpointSet>& groups, std::size_t k,
                  std::size_t from, std::map<SymbolId, int>& open_ends) {
    if (k == groups.size()) return true;
    for (std::size_t j = from; j < seq.groups.size(); ++j) {
        const auto& dg = seq.groups[j];
        bool live = true;
        for (const auto& [sym, end] : open_ends)
            if (end < dg.time) live = false;
        if (!live) break;  // later groups are only further away

        const auto& pg = groups[k];
        if (!std::all_of(pg.begin(), pg.end(), [&](const Endpoint& e) { return group_has(dg.endpoints, e); }))
            continue;
        auto saved = open_ends;
        bool ok = true;
        for (const auto& e : pg) {  // canonical: Starts first
            if (e.is_start()) {
                open_ends[e.symbol] = interval_end(seq, e.symbol, dg.time);
            } else {
                auto it = open_ends.find(e.symbol);
                if (it == open_ends.end() || it->second != dg.time) {
                    ok = false;
                    break;
                }
                open_ends.erase(it);
            }
        }
        if (ok && embed(seq, groups, k + 1, j + 1, open_ends)) return true;
        open_ends = std::move(saved);
    }
    return false;
}

}  // namespace detail

/// True iff `pattern` embeds into `seq`: pattern groups map to data groups at
/// strictly increasing times, each pattern group inside one data group, and
/// each Start/Finish pair onto one data interval. A Start left open by the
/// pattern must belong to an interval still running at the last matched group.
inline bool contains(const EndpointSequence& seq, const TemporalPattern& pattern) {
    if (pattern.empty()) return true;
    const auto c = canonical(pattern);
    std::map<SymbolId, int> open_ends;
    return detail::embed(seq, c.groups, 0, 0, open_ends);
}

/// 2x2 table of `pattern` by direct containment checks.
inline RiskStats count_by_containment(const SequenceDatabase& db, const TemporalPattern& pattern,
                                      std::vector<std::uint32_t>* matched = nullptr) {
    std::size_t carriers_event = 0, carriers_other = 0;
    const std::size_t events = db.event_count();
    for (std::uint32_t i = 0; i < db.sequences.size(); ++i) {
        const auto& s = db.sequences[i];
        if (!contains(s, pattern)) continue;
        (s.event() ? carriers_event : carriers_other)++;
        if (matched) matched->push_back(i);
    }
    return RiskStats::from_counts(carriers_event, carriers_other, events, db.size() - events);
}

// ---- projected databases ----------------------------------------------------

enum class ExtensionSite : std::uint8_t { same_group = 0, new_group = 1 };

/// Where a prefix can end inside one sequence.
struct SuffixState {
    std::uint16_t group = 0;  ///< data group matched by the prefix's last group
    std::uint16_t stop = 0;   ///< last group reachable by a new-group extension

    auto operator<=>(const SuffixState&) const = default;
};

struct ProjectedDatabase {
    TemporalPattern prefix;
    std::vector<SymbolId> open_starts;
    std::vector<std::uint32_t> sequence;  ///< database index per projected patient
    std::vector<std::uint32_t> offsets;   ///< states of patient i: [offsets[i], offsets[i+1])
    std::vector<SuffixState> states;

    std::size_t patients() const noexcept { return sequence.size(); }
};

/// Per-sequence lookup of Finish group indices, by symbol.
class FinishIndex {
public:
    explicit FinishIndex(const EndpointSequence& seq) {
        for (std::uint16_t gi = 0; gi < seq.groups.size(); ++gi)
            for (const auto& e : seq.groups[gi].endpoints)
                if (e.is_finish()) entries_.push_back({e.symbol, gi});
        std::sort(entries_.begin(), entries_.end());
    }

    /// First group index >= `from` holding the Finish of `symbol`.
    std::uint16_t next(SymbolId symbol, std::uint16_t from) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair<SymbolId, std::uint16_t>{symbol, from});
        return (it != entries_.end() && it->first == symbol) ? it->second : std::numeric_limits<std::uint16_t>::max();
    }

private:
    std::vector<std::pair<SymbolId, std::uint16_t>> entries_;
};

struct SupportCount {
    std::uint32_t population = 0;
    std::uint32_t events = 0;
};

/// Candidate counts indexed by `extension_slot(endpoint, site)`.
using SupportTable = std::vector<SupportCount>;

inline std::size_t extension_slot(Endpoint e, ExtensionSite site) {
    return static_cast<std::size_t>(e.code()) * 2 + static_cast<std::size_t>(site);
}

struct MineStats {
    std::uint64_t nodes = 0;  ///< projected databases built
    double seconds = 0.0;
};

/// Shared immutable view of the database plus per-sequence indexes.
class SequenceStore {
public:
    explicit SequenceStore(const SequenceDatabase& db) : db_(db), events_(db.event_count()) {
        finish_.reserve(db.size());
        for (const auto& s : db.sequences) {
            if (s.groups.size() >= std::numeric_limits<std::uint16_t>::max())
                throw ValidationError("sequence too long for '" + s.patient_id + "'");
            finish_.emplace_back(s);
        }
    }

    const SequenceDatabase& db() const noexcept { return db_; }
    const EndpointSequence& seq(std::uint32_t i) const { return db_.sequences[i]; }
    const FinishIndex& finishes(std::uint32_t i) const { return finish_[i]; }
    std::size_t events() const noexcept { return events_; }
    std::size_t non_events() const noexcept { return db_.size() - events_; }
    std::size_t slots() const noexcept { return db_.symbols.size() * 4; }

    RiskStats stats(const SupportCount& c) const {
        return RiskStats::from_counts(c.events, c.population - c.events, events_, non_events());
    }

    /// Last group reachable while every `open` state stays live from group `g`.
    std::uint16_t stop_for(std::uint32_t i, const std::vector<SymbolId>& open, std::uint16_t g) const {
        std::uint16_t stop = static_cast<std::uint16_t>(seq(i).groups.size() - 1);
        for (SymbolId s : open) stop = std::min(stop, finish_[i].next(s, g));
        return stop;
    }

private:
    const SequenceDatabase& db_;
    std::size_t events_;
    std::vector<FinishIndex> finish_;
};

namespace detail {

inline bool is_open(const std::vector<SymbolId>& open, SymbolId s) {
    return std::find(open.begin(), open.end(), s) != open.end();
}

/// Candidate extensions visible from one state, honoring scan and postfix
/// pruning. `visit(endpoint, site)` may see an extension more than once.
template <class Visit>
void scan_state(const EndpointSequence& seq, const SuffixState& st, const EndpointSet& last_group,
                const std::vector<SymbolId>& open, Visit&& visit) {
    for (const auto& e : seq.groups[st.group].endpoints) {
        if (group_has(last_group, e)) continue;
        if (e.is_finish() ? !is_open(open, e.symbol) : is_open(open, e.symbol)) continue;
        visit(e, ExtensionSite::same_group);
    }
    for (std::size_t gi = st.group + 1u; gi <= st.stop; ++gi)
        for (const auto& e : seq.groups[gi].endpoints) {
            if (e.is_finish() ? !is_open(open, e.symbol) : is_open(open, e.symbol)) continue;
            visit(e, ExtensionSite::new_group);
        }
}

}  // namespace detail

/// Counts, per candidate (endpoint, site), the patients in which the prefix
/// can be extended that way; each patient counts at most once per candidate.
inline SupportTable count_support(const SequenceStore& store, const ProjectedDatabase& proj) {
    SupportTable table(store.slots());
    std::vector<std::uint32_t> stamp(store.slots(), 0);
    const EndpointSet empty;
    const auto& last = proj.prefix.empty() ? empty : proj.prefix.groups.back();
    for (std::size_t p = 0; p < proj.patients(); ++p) {
        const auto si = proj.sequence[p];
        const auto& seq = store.seq(si);
        const bool event = seq.event();
        const auto tag = static_cast<std::uint32_t>(p + 1);
        for (auto k = proj.offsets[p]; k < proj.offsets[p + 1]; ++k)
            detail::scan_state(seq, proj.states[k], last, proj.open_starts, [&](Endpoint e, ExtensionSite site) {
                const auto slot = extension_slot(e, site);
                if (stamp[slot] == tag) return;
                stamp[slot] = tag;
                ++table[slot].population;
                if (event) ++table[slot].events;
            });
    }
    return table;
}

/// Projection of the whole database onto the single-Start prefix `e`.
inline ProjectedDatabase project_first(const SequenceStore& store, Endpoint e) {
    ProjectedDatabase out;
    out.prefix.groups.push_back({e});
    out.open_starts = {e.symbol};
    out.offsets.push_back(0);
    for (std::uint32_t i = 0; i < store.db().size(); ++i) {
        const auto& seq = store.seq(i);
        const auto before = out.states.size();
        for (std::uint16_t gi = 0; gi < seq.groups.size(); ++gi)
            if (group_has(seq.groups[gi].endpoints, e))
                out.states.push_back({gi, store.stop_for(i, out.open_starts, gi)});
        if (out.states.size() != before) {
            out.sequence.push_back(i);
            out.offsets.push_back(static_cast<std::uint32_t>(out.states.size()));
        }
    }
    return out;
}

/// Advances every state past the matching occurrences of `e` at `site`.
inline ProjectedDatabase construct_projection(const SequenceStore& store, const ProjectedDatabase& parent, Endpoint e,
                                              ExtensionSite site) {
    ProjectedDatabase out;
    out.prefix = parent.prefix;
    if (site == ExtensionSite::same_group) {
        auto& g = out.prefix.groups.back();
        g.insert(std::upper_bound(g.begin(), g.end(), e, GroupOrder{}), e);
    } else {
        out.prefix.groups.push_back({e});
    }
    out.open_starts = parent.open_starts;
    if (e.is_start()) {
        out.open_starts.push_back(e.symbol);
    } else {
        out.open_starts.erase(std::find(out.open_starts.begin(), out.open_starts.end(), e.symbol));
    }

    out.offsets.push_back(0);
    std::vector<SuffixState> next;
    for (std::size_t p = 0; p < parent.patients(); ++p) {
        const auto si = parent.sequence[p];
        const auto& seq = store.seq(si);
        next.clear();
        for (auto k = parent.offsets[p]; k < parent.offsets[p + 1]; ++k) {
            const auto& st = parent.states[k];
            auto advance = [&](std::uint16_t gi) {
                if (!group_has(seq.groups[gi].endpoints, e)) return;
                next.push_back({gi, store.stop_for(si, out.open_starts, gi)});
            };
            if (site == ExtensionSite::same_group) {
                advance(st.group);
            } else {
                for (auto gi = static_cast<std::uint16_t>(st.group + 1); gi <= st.stop; ++gi) advance(gi);
            }
        }
        if (next.empty()) continue;
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        out.states.insert(out.states.end(), next.begin(), next.end());
        out.sequence.push_back(si);
        out.offsets.push_back(static_cast<std::uint32_t>(out.states.size()));
    }
    return out;
}

namespace detail {

/// Binary identity of a canonical pattern, for the seen-set.
inline std::string compact_key(const TemporalPattern& p) {
    std::string key;
    for (const auto& g : p.groups) {
        for (const auto& e : g) {
            const auto code = e.code() + 1;
            key.append(reinterpret_cast<const char*>(&code), sizeof(code));
        }
        const std::uint32_t sep = 0;
        key.append(reinterpret_cast<const char*>(&sep), sizeof(sep));
    }
    return key;
}

inline PatternResult make_result(const SequenceStore& store, const ProjectedDatabase& proj, const RiskStats& stats,
                                 double r) {
    PatternResult res;
    res.pattern = proj.prefix;
    res.key = canonical_key(proj.prefix, store.db().symbols);
    res.stats = stats;
    res.risk = r;
    res.rr = relative_risk(stats);
    res.odds = odds_ratio(stats);
    res.patients = proj.sequence;
    return res;
}

/// Depth-first growth below one top-level Start. Owns its seen-set and output.
class BranchMiner {
public:
    BranchMiner(const SequenceStore& store, const MinerConfig& cfg) : store_(store), cfg_(cfg) {}

    void run(const ProjectedDatabase& root, double root_risk) {
        seen_.insert(compact_key(root.prefix));
        grow(root, root_risk);
    }

    std::vector<PatternResult>& results() noexcept { return results_; }
    std::uint64_t nodes() const noexcept { return nodes_; }

private:
    void grow(const ProjectedDatabase& proj, double parent_risk) {
        ++nodes_;
        if (cfg_.max_length && proj.prefix.length() >= *cfg_.max_length) return;
        const auto table = count_support(store_, proj);

        std::vector<Endpoint> candidates;
        for (std::uint32_t code = 0; code < store_.db().symbols.size() * 2; ++code) {
            const auto e = Endpoint::from_code(code);
            if (table[extension_slot(e, ExtensionSite::same_group)].population ||
                table[extension_slot(e, ExtensionSite::new_group)].population)
                candidates.push_back(e);
        }
        candidates = point_prune(candidates, proj.open_starts);

        for (const auto& e : candidates) {
            for (auto site : {ExtensionSite::same_group, ExtensionSite::new_group}) {
                const auto& count = table[extension_slot(e, site)];
                if (!count.population) continue;
                const auto stats = store_.stats(count);
                const auto r = accept_step(stats, parent_risk, e, cfg_);
                if (!r) continue;
                auto child = construct_projection(store_, proj, e, site);
                if (!seen_.insert(compact_key(child.prefix)).second) continue;
                if (child.open_starts.empty()) results_.push_back(make_result(store_, child, stats, *r));
                grow(child, *r);
            }
        }
    }

    const SequenceStore& store_;
    const MinerConfig& cfg_;
    std::unordered_set<std::string> seen_;
    std::vector<PatternResult> results_;
    std::uint64_t nodes_ = 0;
};

inline void sort_results(std::vector<PatternResult>& results) {
    std::sort(results.begin(), results.end(), [](const PatternResult& a, const PatternResult& b) {
        if (a.risk != b.risk) return a.risk > b.risk;
        return a.key < b.key;
    });
}

/// Drops repeated canonical keys (same pattern grown in two branches).
inline void merge_duplicates(std::vector<PatternResult>& results) {
    std::sort(results.begin(), results.end(),
              [](const PatternResult& a, const PatternResult& b) { return a.key < b.key; });
    results.erase(std::unique(results.begin(), results.end(),
                              [](const PatternResult& a, const PatternResult& b) { return a.key == b.key; }),
                  results.end());
    sort_results(results);
}

/// Without both event and non-event patients every risk is undefined and the
/// result is simply empty.
inline void check_database(const SequenceDatabase& db) {
    if (db.size() == 0) throw ValidationError("cannot mine an empty database");
}

}  // namespace detail

/// Frequent, high-risk first endpoints: Starts only, ascending code order.
inline std::vector<std::pair<Endpoint, double>> top_level_endpoints(const SequenceStore& store,
                                                                    const MinerConfig& cfg) {
    ProjectedDatabase root;
    root.offsets.push_back(0);
    SupportTable table(store.slots());
    std::vector<std::uint32_t> stamp(store.slots(), 0);
    for (std::uint32_t i = 0; i < store.db().size(); ++i) {
        const auto& seq = store.seq(i);
        for (const auto& g : seq.groups)
            for (const auto& e : g.endpoints) {
                if (!e.is_start()) continue;
                const auto slot = extension_slot(e, ExtensionSite::new_group);
                if (stamp[slot] == i + 1) continue;
                stamp[slot] = i + 1;
                ++table[slot].population;
                if (seq.event()) ++table[slot].events;
            }
    }
    std::vector<std::pair<Endpoint, double>> out;
    for (SymbolId s = 0; s < store.db().symbols.size(); ++s) {
        const auto e = start_of(s);
        const auto& count = table[extension_slot(e, ExtensionSite::new_group)];
        if (!count.population) continue;
        if (auto r = accept_step(store.stats(count), std::nullopt, e, cfg)) out.emplace_back(e, *r);
    }
    return out;
}

/// Mines with `cfg.workers` threads, one top-level Start per task. Output is
/// independent of the worker count: results are deduplicated by canonical key
/// and ordered by (descending risk, key).
inline std::vector<PatternResult> mine_parallel(const SequenceDatabase& db, const MinerConfig& cfg,
                                                MineStats* stats = nullptr) {
    cfg.validate();
    detail::check_database(db);
    const auto t0 = std::chrono::steady_clock::now();
    const SequenceStore store(db);
    const auto roots = top_level_endpoints(store, cfg);

    std::vector<std::vector<PatternResult>> per_task(roots.size());
    std::vector<std::uint64_t> nodes(roots.size(), 0);
    std::vector<std::exception_ptr> errors(roots.size());
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < roots.size();) {
            try {
                detail::BranchMiner branch(store, cfg);
                const auto root = project_first(store, roots[t].first);
                // A single Start is never closed, so it is never emitted itself.
                branch.run(root, roots[t].second);
                per_task[t] = std::move(branch.results());
                nodes[t] = branch.nodes();
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };

    const auto workers = std::min<std::size_t>(cfg.workers, roots.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    std::vector<PatternResult> results;
    for (auto& part : per_task) std::move(part.begin(), part.end(), std::back_inserter(results));
    detail::merge_duplicates(results);

    if (stats) {
        stats->nodes = 0;
        for (auto n : nodes) stats->nodes += n;
        stats->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return results;
}

/// Single-threaded mining; same output as mine_parallel for any worker count.
inline std::vector<PatternResult> mine(const SequenceDatabase& db, MinerConfig cfg, MineStats* stats = nullptr) {
    cfg.workers = 1;
    return mine_parallel(db, cfg, stats);
}

}  // namespace ctpm

#pragma once

// JSON documents exchanged between pipeline stages: mined patterns and the
// evaluation report.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctpm/encoding.hpp"
#include "ctpm/error.hpp"
#include "ctpm/matrix.hpp"
#include "ctpm/miner.hpp"
#include "ctpm/pattern.hpp"
#include "ctpm/survival.hpp"

namespace ctpm {

inline nlohmann::json miner_config_to_json(const MinerConfig& cfg) {
    nlohmann::json j = {{"minsup", cfg.minsup},
                        {"minsup_scope", to_string(cfg.minsup_scope)},
                        {"risk_threshold", cfg.risk_threshold},
                        {"measure", to_string(cfg.measure)}};
    j["max_length"] = cfg.max_length ? nlohmann::json(*cfg.max_length) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json patterns_to_json(const std::vector<PatternResult>& results, const SequenceDatabase& db,
                                       const MinerConfig& cfg) {
    auto list = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::vector<std::string> ids;
        for (auto p : r.patients) ids.push_back(db.sequences[p].patient_id);
        list.push_back({{"id", column_name(i)},
                        {"key", r.key},
                        {"groups", pattern_groups_to_json(r.pattern, db.symbols)},
                        {"a", r.stats.a},
                        {"b", r.stats.b},
                        {"c", r.stats.c},
                        {"d", r.stats.d},
                        {"support_pop", r.stats.support_pop()},
                        {"support_event", r.stats.support_event()},
                        {"rr", r.rr},
                        {"or", r.odds},
                        {"patients", std::move(ids)}});
    }
    return {{"config", miner_config_to_json(cfg)}, {"patterns", std::move(list)}};
}

/// Symbols named by a patterns document, with their severities.
inline SymbolTable symbols_from_patterns(const nlohmann::json& doc) {
    std::vector<Symbol> out;
    try {
        for (const auto& p : doc.at("patterns"))
            for (const auto& g : p.at("groups"))
                for (const auto& e : g)
                    out.push_back({e.at("feature").get<std::string>(), e.at("level").get<std::string>(),
                                   parse_severity(e.value("severity", std::string("other")))});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("patterns file: ") + e.what());
    }
    return SymbolTable(std::move(out));
}

/// Patterns with their stored statistics; endpoints are resolved in `symbols`.
/// `patients` is left empty.
inline std::vector<PatternResult> patterns_from_json(const nlohmann::json& doc, const SymbolTable& symbols) {
    std::vector<PatternResult> out;
    try {
        for (const auto& p : doc.at("patterns")) {
            PatternResult r;
            for (const auto& g : p.at("groups")) {
                EndpointSet group;
                for (const auto& e : g) {
                    const auto id = symbols.id(e.at("feature").get<std::string>(), e.at("level").get<std::string>());
                    const auto kind = e.at("kind").get<std::string>();
                    if (kind != "start" && kind != "finish") throw ParseError("patterns file: bad endpoint kind '" + kind + "'");
                    group.push_back(kind == "start" ? start_of(id) : finish_of(id));
                }
                r.pattern.groups.push_back(std::move(group));
            }
            r.pattern = canonical(std::move(r.pattern));
            if (!well_formed(r.pattern) || !r.pattern.closed())
                throw ValidationError("patterns file: pattern '" + p.value("key", std::string()) + "' is not closed");
            r.key = p.at("key").get<std::string>();
            r.stats = {p.at("a").get<std::size_t>(), p.at("b").get<std::size_t>(), p.at("c").get<std::size_t>(),
                       p.at("d").get<std::size_t>()};
            r.rr = p.at("rr").get<double>();
            r.odds = p.at("or").get<double>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("patterns file: ") + e.what());
    }
    return out;
}

inline nlohmann::json optional_json(const std::optional<double>& x) {
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

/// Evaluation report: per-fold C-indices, chosen penalties, coefficients and
/// the sum-of-ranks pattern ranking.
inline nlohmann::json report_to_json(const CVResult& cv, const PatternRanking& ranking, const BinaryDesignMatrix& m,
                                     const CVConfig& cfg) {
    auto folds = nlohmann::json::array();
    for (std::size_t f = 0; f < cv.folds.size(); ++f) {
        const auto& fr = cv.folds[f];
        std::size_t events = 0;
        for (auto r : fr.test_rows) events += m.outcomes[r].event;
        folds.push_back({{"fold", f + 1},
                         {"test_patients", fr.test_rows.size()},
                         {"test_events", events},
                         {"lambda", fr.lambda},
                         {"c_index_cox", optional_json(fr.c_cox)},
                         {"c_index_rr", optional_json(fr.c_rr)},
                         {"converged", fr.model.converged},
                         {"iterations", fr.model.iterations},
                         {"coefficients", fr.model.coefficients}});
    }
    auto ranked = nlohmann::json::array();
    for (std::size_t i = 0; i < ranking.order.size(); ++i) {
        const auto c = ranking.order[i];
        ranked.push_back({{"rank", i + 1}, {"column", m.columns[c]}, {"key", m.keys[c]}, {"rank_sum", ranking.rank_sum[c]}});
    }
    return {{"seed", cv.seed},
            {"folds_requested", cfg.folds},
            {"lambda_grid", cfg.lambdas},
            {"patients", m.rows()},
            {"patterns", m.cols()},
            {"folds", std::move(folds)},
            {"mean_c_index_cox", cv.mean_c_cox},
            {"mean_c_index_rr", cv.mean_c_rr},
            {"pooled_c_index_cox", cv.pooled_c_cox},
            {"pooled_c_index_rr", cv.pooled_c_rr},
            {"warnings", cv.warnings},
            {"ranking", std::move(ranked)}};
}

/// Column indices in ranked order from a report, or identity when absent.
inline std::vector<std::size_t> ranking_from_report(const nlohmann::json& report, std::size_t columns) {
    std::vector<std::size_t> order;
    if (report.is_null()) {
        for (std::size_t i = 0; i < columns; ++i) order.push_back(i);
        return order;
    }
    try {
        for (const auto& r : report.at("ranking")) {
            const auto col = r.at("column").get<std::string>();
            if (col.size() < 2 || col[0] != 'P') throw ParseError("report: bad column '" + col + "'");
            const auto idx = static_cast<std::size_t>(std::stoul(col.substr(1))) - 1;
            if (idx >= columns) throw ValidationError("report ranks column " + col + " beyond the pattern list");
            order.push_back(idx);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return order;
}

}  // namespace ctpm

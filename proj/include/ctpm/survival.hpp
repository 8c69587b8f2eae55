#pragma once

// Survival evaluation of mined patterns: Harrell's C-index, a ridge-penalised
// Cox model (Breslow ties), a model-free log-RR scorer, event-stratified
// k-fold cross-validation and sum-of-ranks pattern ranking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctpm/error.hpp"
#include "ctpm/ingest.hpp"
#include "ctpm/matrix.hpp"
#include "ctpm/risk.hpp"

namespace ctpm {

/// Harrell's concordance. A pair is comparable when the earlier time is an
/// event, or when times tie and exactly one of the two is an event. The
/// higher score should belong to the earlier event; tied scores count 1/2.
inline double concordance_index(std::span<const double> scores, std::span<const SurvivalOutcome> outcomes) {
    if (scores.size() != outcomes.size()) throw ValidationError("scores and outcomes differ in length");
    double concordant = 0.0;
    std::size_t comparable = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!outcomes[i].event) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (i == j) continue;
            const bool later = outcomes[j].time > outcomes[i].time;
            const bool tied_censored = outcomes[j].time == outcomes[i].time && !outcomes[j].event;
            if (!later && !tied_censored) continue;
            ++comparable;
            if (scores[i] > scores[j]) concordant += 1.0;
            else if (scores[i] == scores[j]) concordant += 0.5;
        }
    }
    if (comparable == 0) throw UndefinedMetricError("C-index undefined: no comparable pairs");
    return concordant / static_cast<double>(comparable);
}

struct CoxModel {
    std::vector<double> coefficients;
    double lambda = 0.0;
    bool converged = false;
    int iterations = 0;

    /// Linear predictor; larger means higher hazard.
    double score(const BinaryDesignMatrix& m, std::size_t row) const {
        double s = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.at(row, c)) s += coefficients[c];
        return s;
    }

    std::vector<double> scores(const BinaryDesignMatrix& m) const {
        std::vector<double> out(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) out[r] = score(m, r);
        return out;
    }
};

struct CoxFitOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
};

namespace detail {

struct CoxEval {
    double objective = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd information;  ///< negative Hessian
};

/// Penalised Breslow partial log-likelihood with its derivatives.
inline CoxEval cox_evaluate(const BinaryDesignMatrix& m, const Eigen::VectorXd& beta, double lambda,
                            bool derivatives) {
    const auto n = m.rows();
    const auto p = m.cols();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return m.outcomes[a].time > m.outcomes[b].time;
    });

    std::vector<std::vector<std::size_t>> nz(n);
    Eigen::VectorXd eta(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < p; ++c)
            if (m.at(r, c)) {
                nz[r].push_back(c);
                s += beta[static_cast<Eigen::Index>(c)];
            }
        eta[static_cast<Eigen::Index>(r)] = s;
    }
    const double shift = n ? eta.maxCoeff() : 0.0;

    CoxEval ev;
    const auto pi = static_cast<Eigen::Index>(p);
    ev.gradient = Eigen::VectorXd::Zero(pi);
    if (derivatives) ev.information = Eigen::MatrixXd::Zero(pi, pi);
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(pi);
    Eigen::MatrixXd s2;
    if (derivatives) s2 = Eigen::MatrixXd::Zero(pi, pi);

    double loglik = 0.0;
    std::size_t k = 0;
    while (k < n) {
        // Add the whole tie block to the risk set, then score its events.
        const double t = m.outcomes[order[k]].time;
        std::size_t end = k;
        while (end < n && m.outcomes[order[end]].time == t) ++end;
        for (std::size_t q = k; q < end; ++q) {
            const auto r = order[q];
            const double w = std::exp(eta[static_cast<Eigen::Index>(r)] - shift);
            s0 += w;
            for (auto c : nz[r]) {
                s1[static_cast<Eigen::Index>(c)] += w;
                if (derivatives)
                    for (auto c2 : nz[r]) s2(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c2)) += w;
            }
        }
        double d = 0.0;
        for (std::size_t q = k; q < end; ++q) {
            const auto r = order[q];
            if (!m.outcomes[r].event) continue;
            d += 1.0;
            loglik += eta[static_cast<Eigen::Index>(r)];
            for (auto c : nz[r]) ev.gradient[static_cast<Eigen::Index>(c)] += 1.0;
        }
        if (d > 0.0) {
            loglik -= d * (std::log(s0) + shift);
            const Eigen::VectorXd mean = s1 / s0;
            ev.gradient -= d * mean;
            if (derivatives) ev.information += d * (s2 / s0 - mean * mean.transpose());
        }
        k = end;
    }
    ev.objective = loglik - 0.5 * lambda * beta.squaredNorm();
    ev.gradient -= lambda * beta;
    if (derivatives) ev.information.diagonal().array() += lambda;
    return ev;
}

}  // namespace detail

/// Penalised objective: Breslow partial log-likelihood - (lambda/2)|beta|^2.
inline double cox_objective(const BinaryDesignMatrix& m, std::span<const double> beta, double lambda) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i) b[static_cast<Eigen::Index>(i)] = beta[i];
    return detail::cox_evaluate(m, b, lambda, false).objective;
}

/// Newton iterations with step halving from beta = 0. Converged when the
/// gradient max-norm drops below the tolerance; otherwise the last iterate is
/// returned with converged = false.
inline CoxModel fit_ridge_cox(const BinaryDesignMatrix& m, double lambda, const CoxFitOptions& opts = {}) {
    if (!(lambda >= 0.0)) throw ConfigError("ridge penalty must be >= 0");
    if (std::none_of(m.outcomes.begin(), m.outcomes.end(), [](const auto& o) { return o.event; }))
        throw ValidationError("Cox fit needs at least one event");

    const auto p = static_cast<Eigen::Index>(m.cols());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    CoxModel model;
    model.lambda = lambda;
    auto ev = detail::cox_evaluate(m, beta, lambda, true);
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (p == 0 || ev.gradient.cwiseAbs().maxCoeff() < opts.tolerance) {
            model.converged = true;
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> solver(ev.information);
        Eigen::VectorXd step = solver.solve(ev.gradient);
        if (solver.info() != Eigen::Success || !step.allFinite()) {
            Eigen::MatrixXd jittered = ev.information;
            jittered.diagonal().array() += 1e-8;
            step = jittered.ldlt().solve(ev.gradient);
        }
        // Newton decrement: predicted gain of the full step.
        if (std::abs(step.dot(ev.gradient)) < opts.tolerance) {
            model.converged = true;
            break;
        }
        double scale = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, scale *= 0.5) {
            Eigen::VectorXd trial = beta + scale * step;
            auto tev = detail::cox_evaluate(m, trial, lambda, true);
            if (std::isfinite(tev.objective) && tev.objective >= ev.objective) {
                beta = std::move(trial);
                ev = std::move(tev);
                accepted = true;
                break;
            }
        }
        model.iterations = it + 1;
        if (!accepted) break;
    }
    if (!model.converged && (p == 0 || ev.gradient.cwiseAbs().maxCoeff() < opts.tolerance)) model.converged = true;
    model.coefficients.assign(beta.data(), beta.data() + p);
    return model;
}

/// score_i = sum_j cell(i,j) * log(rr_j).
inline std::vector<double> rr_score(const BinaryDesignMatrix& m, std::span<const double> rr) {
    if (rr.size() != m.cols()) throw ValidationError("one risk value per column required");
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.at(r, c)) out[r] += std::log(rr[c]);
    return out;
}

/// Relative risk of every column from the rows' own 2x2 tables; columns with
/// undefined risk get 1 (no contribution to rr_score).
inline std::vector<double> column_relative_risks(const BinaryDesignMatrix& m) {
    std::size_t events = 0;
    for (const auto& o : m.outcomes) events += o.event;
    std::vector<double> rr(m.cols(), 1.0);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::size_t ce = 0, co = 0;
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (m.at(r, c)) (m.outcomes[r].event ? ce : co)++;
        const auto stats = RiskStats::from_counts(ce, co, events, m.rows() - events);
        if (stats.risk_defined()) rr[c] = relative_risk(stats);
    }
    return rr;
}

// ---- cross-validation -------------------------------------------------------

struct CVConfig {
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    std::vector<double> lambdas = {0.01, 0.1, 1.0, 10.0};
    std::size_t inner_folds = 3;
    CoxFitOptions fit;
};

struct FoldResult {
    std::vector<std::size_t> test_rows;
    double lambda = 0.0;
    CoxModel model;
    std::optional<double> c_cox;  ///< empty when the fold has no comparable pair
    std::optional<double> c_rr;
};

struct CVResult {
    std::uint64_t seed = 0;
    std::vector<FoldResult> folds;
    double mean_c_cox = 0.0;
    double mean_c_rr = 0.0;
    double pooled_c_cox = 0.0;  ///< C-index over all out-of-fold scores
    double pooled_c_rr = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

/// Fisher-Yates driven by raw mt19937_64 output, identical on every platform.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

/// Event-stratified fold id per row.
inline std::vector<std::size_t> stratified_folds(const std::vector<SurvivalOutcome>& outcomes, std::size_t k,
                                                 std::uint64_t seed) {
    std::vector<std::size_t> events, others;
    for (std::size_t i = 0; i < outcomes.size(); ++i) (outcomes[i].event ? events : others).push_back(i);
    std::mt19937_64 rng(seed);
    shuffle(events, rng);
    shuffle(others, rng);
    std::vector<std::size_t> fold(outcomes.size());
    std::size_t slot = 0;
    for (auto i : events) fold[i] = slot++ % k;
    for (auto i : others) fold[i] = slot++ % k;
    return fold;
}

inline std::optional<double> try_concordance(std::span<const double> s, std::span<const SurvivalOutcome> o) {
    try {
        return concordance_index(s, o);
    } catch (const UndefinedMetricError&) {
        return std::nullopt;
    }
}

inline double choose_lambda(const BinaryDesignMatrix& train, const CVConfig& cfg, std::uint64_t seed) {
    if (cfg.lambdas.size() == 1) return cfg.lambdas.front();
    std::size_t events = 0;
    for (const auto& o : train.outcomes) events += o.event;
    const std::size_t k = std::min(cfg.inner_folds, events);
    if (k < 2) return cfg.lambdas.front();
    const auto fold = stratified_folds(train.outcomes, k, seed);

    double best_c = -1.0;
    double best = cfg.lambdas.front();
    for (double lambda : cfg.lambdas) {
        std::vector<double> oof(train.rows(), 0.0);
        for (std::size_t f = 0; f < k; ++f) {
            std::vector<std::size_t> in, out;
            for (std::size_t r = 0; r < train.rows(); ++r) (fold[r] == f ? out : in).push_back(r);
            const auto inner = train.subset(in);
            if (std::none_of(inner.outcomes.begin(), inner.outcomes.end(), [](const auto& o) { return o.event; }))
                continue;
            const auto model = fit_ridge_cox(inner, lambda, cfg.fit);
            for (auto r : out) oof[r] = model.score(train, r);
        }
        const auto c = try_concordance(oof, train.outcomes);
        if (c && *c > best_c) {
            best_c = *c;
            best = lambda;
        }
    }
    return best;
}

}  // namespace detail

/// Event-stratified k-fold evaluation of the ridge Cox model (lambda tuned
/// per fold on the training rows only) and of rr_score (risks recomputed on
/// the training rows).
inline CVResult cross_validate(const BinaryDesignMatrix& m, const CVConfig& cfg) {
    if (m.cols() == 0) throw UndefinedMetricError("C-index undefined: the matrix has no pattern columns");
    if (cfg.folds < 2 || cfg.folds > m.rows()) throw ConfigError("folds must lie in [2, patients]");
    if (cfg.lambdas.empty()) throw ConfigError("empty lambda grid");
    std::size_t events = 0;
    for (const auto& o : m.outcomes) events += o.event;
    if (events == 0) throw ValidationError("cross-validation needs at least one event");

    CVResult res;
    res.seed = cfg.seed;
    if (cfg.folds > events)
        res.warnings.push_back("fewer events (" + std::to_string(events) + ") than folds (" +
                               std::to_string(cfg.folds) + "): some test folds hold no event");

    const auto fold = detail::stratified_folds(m.outcomes, cfg.folds, cfg.seed);
    std::vector<double> oof_cox(m.rows(), 0.0), oof_rr(m.rows(), 0.0);
    for (std::size_t f = 0; f < cfg.folds; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t r = 0; r < m.rows(); ++r) (fold[r] == f ? test_rows : train_rows).push_back(r);
        const auto train = m.subset(train_rows);
        const auto test = m.subset(test_rows);
        if (std::none_of(train.outcomes.begin(), train.outcomes.end(), [](const auto& o) { return o.event; }))
            throw ValidationError("fold " + std::to_string(f + 1) + " leaves no event to train on");

        FoldResult fr;
        fr.test_rows = test_rows;
        fr.lambda = detail::choose_lambda(train, cfg, cfg.seed * 1000003u + f + 1);
        fr.model = fit_ridge_cox(train, fr.lambda, cfg.fit);
        const auto cox_scores = fr.model.scores(test);
        const auto rr_scores = rr_score(test, column_relative_risks(train));
        fr.c_cox = detail::try_concordance(cox_scores, test.outcomes);
        fr.c_rr = detail::try_concordance(rr_scores, test.outcomes);
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            oof_cox[test_rows[i]] = cox_scores[i];
            oof_rr[test_rows[i]] = rr_scores[i];
        }
        res.folds.push_back(std::move(fr));
    }

    res.pooled_c_cox = concordance_index(oof_cox, m.outcomes);
    res.pooled_c_rr = concordance_index(oof_rr, m.outcomes);
    double sum_cox = 0.0, sum_rr = 0.0;
    std::size_t n_cox = 0, n_rr = 0;
    for (const auto& fr : res.folds) {
        if (fr.c_cox) sum_cox += *fr.c_cox, ++n_cox;
        if (fr.c_rr) sum_rr += *fr.c_rr, ++n_rr;
    }
    // Leave-one-out style folds have no comparable pairs: fall back to pooled.
    res.mean_c_cox = n_cox ? sum_cox / static_cast<double>(n_cox) : res.pooled_c_cox;
    res.mean_c_rr = n_rr ? sum_rr / static_cast<double>(n_rr) : res.pooled_c_rr;
    return res;
}

// ---- ranking ------------------------------------------------------------------

struct PatternRanking {
    std::vector<std::size_t> order;   ///< column indices, best first
    std::vector<std::size_t> rank_sum;  ///< per column
};

/// Ranks columns in every model by descending |coefficient| (rank 1 best,
/// ties by key), sums ranks over models and orders by ascending sum, ties by key.
inline PatternRanking rank_patterns(const std::vector<CoxModel>& models, const std::vector<std::string>& keys) {
    if (models.empty()) throw ValidationError("ranking needs at least one model");
    const auto p = keys.size();
    PatternRanking out;
    out.rank_sum.assign(p, 0);
    for (const auto& model : models) {
        if (model.coefficients.size() != p) throw ValidationError("model and key count differ");
        std::vector<std::size_t> idx(p);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double x = std::abs(model.coefficients[a]), y = std::abs(model.coefficients[b]);
            if (x != y) return x > y;
            return keys[a] < keys[b];
        });
        for (std::size_t r = 0; r < p; ++r) out.rank_sum[idx[r]] += r + 1;
    }
    out.order.resize(p);
    std::iota(out.order.begin(), out.order.end(), 0);
    std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
        if (out.rank_sum[a] != out.rank_sum[b]) return out.rank_sum[a] < out.rank_sum[b];
        return keys[a] < keys[b];
    });
    return out;
}

}  // namespace ctpm

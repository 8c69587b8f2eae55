// ctpm command-line front end: abstract, mine, matrix, evaluate, render,
// synth and the chained pipeline.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ctpm/ctpm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string config;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ctpm::ValidationError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
    const auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ctpm::ValidationError("cannot write '" + path + "'");
    out << text;
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ctpm::ParseError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

/// FNV-1a, enough to tell input files apart in a manifest.
std::string digest(const std::string& path) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : read_file(path)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Manifest {
    std::string command;
    json inputs = json::object();
    json config = json::object();
    json timing = json::object();

    void input(const std::string& name, const std::string& path) { inputs[name] = {{"path", path}, {"digest", digest(path)}}; }

    void write(const std::string& path, const Globals& g) const {
        json doc = {{"tool", "ctpm"},
                    {"version", ctpm::kVersion},
                    {"command", command},
                    {"seed", g.seed},
                    {"workers", g.workers},
                    {"inputs", inputs},
                    {"config", config},
                    {"timing_seconds", timing}};
        write_json(path, doc);
    }
};

std::string sidecar_path(const std::string& matrix_csv) { return matrix_csv + ".json"; }

// ---- stages -------------------------------------------------------------------

ctpm::FeatureConfig load_features(const Globals& g) {
    if (g.config.empty()) throw ctpm::ConfigError("a feature config is required (--config)");
    return ctpm::parse_feature_config(read_json(g.config));
}

ctpm::AbstractedCohort run_abstract(const std::string& data, const std::string& outcomes,
                                    const ctpm::FeatureConfig& features, int waves) {
    std::ifstream d(data), o(outcomes);
    if (!d) throw ctpm::ValidationError("cannot open '" + data + "'");
    if (!o) throw ctpm::ValidationError("cannot open '" + outcomes + "'");
    const auto cohort = ctpm::parse_cohort(d, o, features, waves);
    auto abstracted = ctpm::abstract_cohort(cohort);
    for (const auto& w : abstracted.warnings) std::cerr << "warning: " << w << '\n';
    return abstracted;
}

struct MinerFlags {
    double minsup = 0.05;
    std::string scope = "event_group";
    double risk = 1.5;
    std::string measure = "rr";
    std::size_t max_length = 0;

    ctpm::MinerConfig config(const Globals& g) const {
        ctpm::MinerConfig cfg;
        cfg.minsup = minsup;
        cfg.minsup_scope = ctpm::parse_minsup_scope(scope);
        cfg.risk_threshold = risk;
        cfg.measure = ctpm::parse_measure(measure);
        if (max_length) cfg.max_length = max_length;
        cfg.workers = g.workers;
        cfg.validate();
        return cfg;
    }
};

void add_miner_flags(CLI::App* cmd, MinerFlags& f) {
    cmd->add_option("--minsup", f.minsup, "minimum support, strict")->capture_default_str();
    cmd->add_option("--minsup-scope", f.scope, "event_group or population")
        ->check(CLI::IsMember({"event_group", "population"}))
        ->capture_default_str();
    cmd->add_option("--risk-threshold", f.risk, "minimum risk of a reported pattern")->capture_default_str();
    cmd->add_option("--measure", f.measure, "rr or or")->check(CLI::IsMember({"rr", "or"}))->capture_default_str();
    cmd->add_option("--max-length", f.max_length, "maximum pattern length in endpoints (0 = none)");
}

struct EvalFlags {
    std::size_t folds = 5;
    std::vector<double> lambdas = {0.01, 0.1, 1.0, 10.0};

    ctpm::CVConfig config(const Globals& g) const {
        ctpm::CVConfig cfg;
        cfg.folds = folds;
        cfg.seed = g.seed;
        cfg.lambdas = lambdas;
        return cfg;
    }
};

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
    cmd->add_option("--folds", f.folds, "cross-validation folds")->capture_default_str();
    cmd->add_option("--lambda", f.lambdas, "ridge penalty grid")->expected(1, -1);
}

json cv_config_json(const ctpm::CVConfig& cfg) {
    return {{"folds", cfg.folds}, {"seed", cfg.seed}, {"lambdas", cfg.lambdas}, {"inner_folds", cfg.inner_folds}};
}

json evaluate(const ctpm::BinaryDesignMatrix& m, const ctpm::CVConfig& cfg) {
    const auto cv = ctpm::cross_validate(m, cfg);
    std::vector<ctpm::CoxModel> models;
    for (const auto& f : cv.folds) models.push_back(f.model);
    const auto ranking = ctpm::rank_patterns(models, m.keys);
    for (const auto& w : cv.warnings) std::cerr << "warning: " << w << '\n';
    return ctpm::report_to_json(cv, ranking, m, cfg);
}

ctpm::RenderSpec render_spec(std::size_t top, const std::string& measure) {
    ctpm::RenderSpec spec;
    spec.max_patterns = top;
    spec.measure = ctpm::parse_measure(measure);
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine high-risk temporal patterns from wave-structured cohorts"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--workers", g.workers, "miner threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--config", g.config, "feature config JSON");

    // abstract
    auto* abstract_cmd = app.add_subcommand("abstract", "cohort CSVs -> intervals JSON");
    std::string data, outcomes, out;
    int waves = 0;
    abstract_cmd->add_option("--data", data, "long-format cohort CSV")->required()->check(CLI::ExistingFile);
    abstract_cmd->add_option("--outcomes", outcomes, "outcome CSV")->required()->check(CLI::ExistingFile);
    abstract_cmd->add_option("--waves", waves, "number of waves (default: largest wave seen)");
    abstract_cmd->add_option("--out", out, "intervals JSON")->required();

    // mine
    auto* mine_cmd = app.add_subcommand("mine", "intervals JSON -> patterns JSON");
    std::string intervals;
    MinerFlags miner_flags;
    mine_cmd->add_option("--intervals", intervals)->required()->check(CLI::ExistingFile);
    mine_cmd->add_option("--out", out, "patterns JSON")->required();
    add_miner_flags(mine_cmd, miner_flags);

    // matrix
    auto* matrix_cmd = app.add_subcommand("matrix", "intervals + patterns -> binary matrix CSV");
    std::string patterns_path;
    matrix_cmd->add_option("--intervals", intervals)->required()->check(CLI::ExistingFile);
    matrix_cmd->add_option("--patterns", patterns_path)->required()->check(CLI::ExistingFile);
    matrix_cmd->add_option("--out", out, "matrix CSV; the column sidecar goes to <out>.json")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "matrix -> cross-validated report JSON");
    std::string matrix_path, sidecar;
    EvalFlags eval_flags;
    eval_cmd->add_option("--matrix", matrix_path)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--sidecar", sidecar, "column sidecar (default: <matrix>.json)");
    eval_cmd->add_option("--out", out, "report JSON")->required();
    add_eval_flags(eval_cmd, eval_flags);

    // render
    auto* render_cmd = app.add_subcommand("render", "patterns (+ report ranking) -> SVG");
    std::string report_path;
    std::size_t top = 10;
    render_cmd->add_option("--patterns", patterns_path)->required()->check(CLI::ExistingFile);
    render_cmd->add_option("--report", report_path, "report whose ranking orders the rows")->check(CLI::ExistingFile);
    render_cmd->add_option("--top", top, "patterns to draw")->check(CLI::PositiveNumber)->capture_default_str();
    render_cmd->add_option("--out", out, "SVG file")->required();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort with a planted pattern");
    std::string out_dir;
    ctpm::SynthConfig synth;
    synth.patients = 1000;
    synth.features = 20;
    synth.event_rate = 0.15;
    double carriers_event = 0.6, carriers_other = 0.1;
    bool no_plant = false;
    synth_cmd->add_option("--out-dir", out_dir)->required();
    synth_cmd->add_option("--patients", synth.patients)->capture_default_str();
    synth_cmd->add_option("--waves", synth.waves)->capture_default_str();
    synth_cmd->add_option("--features", synth.features)->capture_default_str();
    synth_cmd->add_option("--event-rate", synth.event_rate)->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise_rate, "background level noise rate")->capture_default_str();
    synth_cmd->add_option("--carriers-event", carriers_event)->capture_default_str();
    synth_cmd->add_option("--carriers-non-event", carriers_other)->capture_default_str();
    synth_cmd->add_flag("--no-plant", no_plant, "generate background noise only");

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "abstract, mine, matrix, evaluate and render in one run");
    pipe_cmd->add_option("--data", data)->required()->check(CLI::ExistingFile);
    pipe_cmd->add_option("--outcomes", outcomes)->required()->check(CLI::ExistingFile);
    pipe_cmd->add_option("--waves", waves);
    pipe_cmd->add_option("--out-dir", out_dir)->required();
    pipe_cmd->add_option("--top", top)->check(CLI::PositiveNumber)->capture_default_str();
    add_miner_flags(pipe_cmd, miner_flags);
    add_eval_flags(pipe_cmd, eval_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        Manifest manifest;
        Stopwatch clock;

        if (*abstract_cmd) {
            manifest.command = "abstract";
            manifest.input("data", data);
            manifest.input("outcomes", outcomes);
            const auto features = load_features(g);
            manifest.input("config", g.config);
            const auto cohort = run_abstract(data, outcomes, features, waves);
            write_json(out, ctpm::intervals_to_json(cohort));
            manifest.config = {{"features", ctpm::to_json(features)}, {"waves", cohort.wave_count}};
            manifest.timing["abstract"] = clock.lap();
            manifest.write(out + ".manifest.json", g);
        } else if (*mine_cmd) {
            manifest.command = "mine";
            manifest.input("intervals", intervals);
            const auto cfg = miner_flags.config(g);
            const auto db = ctpm::encode_cohort(ctpm::intervals_from_json(read_json(intervals)).patients);
            manifest.timing["load"] = clock.lap();
            ctpm::MineStats stats;
            const auto results = ctpm::mine_parallel(db, cfg, &stats);
            manifest.timing["mining"] = stats.seconds;
            clock.lap();
            write_json(out, ctpm::patterns_to_json(results, db, cfg));
            manifest.timing["write"] = clock.lap();
            manifest.config = ctpm::miner_config_to_json(cfg);
            manifest.config["projections"] = stats.nodes;
            manifest.config["patterns"] = results.size();
            manifest.write(out + ".manifest.json", g);
            std::cerr << results.size() << " patterns\n";
        } else if (*matrix_cmd) {
            manifest.command = "matrix";
            manifest.input("intervals", intervals);
            manifest.input("patterns", patterns_path);
            const auto db = ctpm::encode_cohort(ctpm::intervals_from_json(read_json(intervals)).patients);
            const auto doc = read_json(patterns_path);
            const auto patterns = ctpm::patterns_from_json(doc, db.symbols);
            const auto m = ctpm::build_matrix(patterns, db);
            std::ostringstream csv;
            ctpm::write_matrix_csv(m, csv);
            write_file(out, csv.str());
            write_json(sidecar_path(out), ctpm::matrix_sidecar(m));
            manifest.timing["matrix"] = clock.lap();
            manifest.write(out + ".manifest.json", g);
        } else if (*eval_cmd) {
            manifest.command = "evaluate";
            if (sidecar.empty()) sidecar = sidecar_path(matrix_path);
            manifest.input("matrix", matrix_path);
            manifest.input("sidecar", sidecar);
            std::ifstream in(matrix_path);
            const auto m = ctpm::read_matrix_csv(in, read_json(sidecar));
            const auto cfg = eval_flags.config(g);
            write_json(out, evaluate(m, cfg));
            manifest.config = cv_config_json(cfg);
            manifest.timing["evaluate"] = clock.lap();
            manifest.write(out + ".manifest.json", g);
        } else if (*render_cmd) {
            manifest.command = "render";
            manifest.input("patterns", patterns_path);
            const auto doc = read_json(patterns_path);
            const auto symbols = ctpm::symbols_from_patterns(doc);
            const auto patterns = ctpm::patterns_from_json(doc, symbols);
            json report;
            if (!report_path.empty()) {
                manifest.input("report", report_path);
                report = read_json(report_path);
            }
            const auto order = ctpm::ranking_from_report(report, patterns.size());
            const auto measure = doc.at("config").value("measure", std::string("rr"));
            write_file(out, ctpm::render_svg(order, patterns, symbols, render_spec(top, measure)));
            manifest.config = {{"top", top}};
            manifest.timing["render"] = clock.lap();
            manifest.write(out + ".manifest.json", g);
        } else if (*synth_cmd) {
            manifest.command = "synth";
            synth.seed = g.seed;
            if (!no_plant) synth.planted.push_back(ctpm::default_planted_pattern(carriers_event, carriers_other));
            const auto result = ctpm::generate(synth);
            const auto dir = fs::path(out_dir);
            fs::create_directories(dir);
            std::ostringstream cohort_csv, outcome_csv;
            ctpm::write_cohort_csv(result.cohort, cohort_csv);
            ctpm::write_outcomes_csv(result.cohort, outcome_csv);
            write_file((dir / "cohort.csv").string(), cohort_csv.str());
            write_file((dir / "outcomes.csv").string(), outcome_csv.str());
            write_json((dir / "features.json").string(), ctpm::to_json(result.cohort.features));
            write_json((dir / "truth.json").string(), result.manifest);
            manifest.config = result.manifest;
            manifest.timing["synth"] = clock.lap();
            manifest.write((dir / "run_manifest.json").string(), g);
        } else if (*pipe_cmd) {
            manifest.command = "pipeline";
            manifest.input("data", data);
            manifest.input("outcomes", outcomes);
            const auto features = load_features(g);
            manifest.input("config", g.config);
            const auto dir = fs::path(out_dir);
            fs::create_directories(dir);
            auto path = [&](const char* name) { return (dir / name).string(); };

            const auto cohort = run_abstract(data, outcomes, features, waves);
            write_json(path("intervals.json"), ctpm::intervals_to_json(cohort));
            manifest.timing["abstract"] = clock.lap();

            const auto mcfg = miner_flags.config(g);
            const auto db = ctpm::encode_cohort(cohort.patients);
            manifest.timing["encode"] = clock.lap();
            ctpm::MineStats stats;
            const auto results = ctpm::mine_parallel(db, mcfg, &stats);
            manifest.timing["mining"] = stats.seconds;
            clock.lap();
            write_json(path("patterns.json"), ctpm::patterns_to_json(results, db, mcfg));

            const auto m = ctpm::build_matrix(results, db);
            std::ostringstream csv;
            ctpm::write_matrix_csv(m, csv);
            write_file(path("matrix.csv"), csv.str());
            write_json(path("matrix.csv.json"), ctpm::matrix_sidecar(m));
            manifest.timing["matrix"] = clock.lap();

            const auto ecfg = eval_flags.config(g);
            json report;
            if (m.cols() == 0) {
                std::cerr << "warning: no patterns mined; evaluation skipped\n";
                report = {{"patterns", 0}, {"error", "C-index undefined: no pattern columns"}, {"ranking", json::array()}};
            } else {
                report = evaluate(m, ecfg);
            }
            write_json(path("report.json"), report);
            manifest.timing["evaluate"] = clock.lap();

            const auto order = ctpm::ranking_from_report(report, results.size());
            write_file(path("patterns.svg"),
                       ctpm::render_svg(order, results, db.symbols, render_spec(top, miner_flags.measure)));
            manifest.timing["render"] = clock.lap();

            manifest.config = {{"features", ctpm::to_json(features)},
                               {"waves", cohort.wave_count},
                               {"miner", ctpm::miner_config_to_json(mcfg)},
                               {"evaluation", cv_config_json(ecfg)},
                               {"top", top},
                               {"patterns", results.size()},
                               {"projections", stats.nodes}};
            manifest.write(path("run_manifest.json"), g);
            std::cerr << results.size() << " patterns\n";
        }
    } catch (const ctpm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

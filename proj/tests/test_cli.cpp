#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = 0;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    static fs::path dir;

    static void SetUpTestSuite() {
        dir = fs::temp_directory_path() / ("ctpm_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto r = run("--seed 3 synth --out-dir " + (dir / "s").string() + " --patients 400 --features 8");
        ASSERT_EQ(r.code, 0) << r.err;
    }

    static void TearDownTestSuite() { fs::remove_all(dir); }

    static CliResult run(const std::string& args) {
        const auto err = dir / "stderr.txt";
        const std::string cmd = std::string(CTPM_CLI_PATH) + " " + args + " 2> " + err.string() + " > /dev/null";
        const int status = std::system(cmd.c_str());
        return {WEXITSTATUS(status), slurp(err)};
    }

    static std::string synth_inputs() {
        const auto s = dir / "s";
        return " --data " + (s / "cohort.csv").string() + " --outcomes " + (s / "outcomes.csv").string();
    }

    static std::string config() { return "--config " + (dir / "s" / "features.json").string() + " "; }

    static std::set<std::string> keys(const fs::path& patterns) {
        std::set<std::string> out;
        const auto doc = nlohmann::json::parse(slurp(patterns));
        for (const auto& p : doc.at("patterns")) out.insert(p.at("key").get<std::string>());
        return out;
    }
};

fs::path Cli::dir;

}  // namespace

TEST_F(Cli, SynthThenPipeline) {
    const auto out = dir / "p1";
    const auto r = run(config() + "pipeline" + synth_inputs() + " --out-dir " + out.string());
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"intervals.json", "patterns.json", "matrix.csv", "matrix.csv.json", "report.json",
                          "patterns.svg", "run_manifest.json"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    EXPECT_EQ(report.at("folds").size(), 5u);
    const auto manifest = nlohmann::json::parse(slurp(out / "run_manifest.json"));
    EXPECT_TRUE(manifest.at("timing_seconds").contains("mining"));
    EXPECT_TRUE(manifest.at("inputs").at("data").at("digest").get<std::string>().starts_with("fnv1a64:"));
}

TEST_F(Cli, RerunsAndWorkerCountsAreByteIdentical) {
    const auto a = dir / "d1", b = dir / "d2";
    ASSERT_EQ(run(config() + "--workers 1 pipeline" + synth_inputs() + " --out-dir " + a.string()).code, 0);
    ASSERT_EQ(run(config() + "pipeline --workers 8" + synth_inputs() + " --out-dir " + b.string()).code, 0);
    for (const char* f : {"intervals.json", "patterns.json", "matrix.csv", "matrix.csv.json", "report.json", "patterns.svg"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST_F(Cli, StagesMatchPipeline) {
    const auto p = dir / "full", s = dir / "staged";
    ASSERT_EQ(run(config() + "pipeline" + synth_inputs() + " --out-dir " + p.string()).code, 0);
    fs::create_directories(s);
    ASSERT_EQ(run(config() + "abstract" + synth_inputs() + " --out " + (s / "intervals.json").string()).code, 0);
    ASSERT_EQ(run("mine --intervals " + (s / "intervals.json").string() + " --out " + (s / "patterns.json").string()).code, 0);
    ASSERT_EQ(run("matrix --intervals " + (s / "intervals.json").string() + " --patterns " + (s / "patterns.json").string() +
                  " --out " + (s / "matrix.csv").string())
                  .code,
              0);
    ASSERT_EQ(run("evaluate --matrix " + (s / "matrix.csv").string() + " --out " + (s / "report.json").string()).code, 0);
    ASSERT_EQ(run("render --patterns " + (s / "patterns.json").string() + " --report " + (s / "report.json").string() +
                  " --out " + (s / "patterns.svg").string())
                  .code,
              0);
    for (const char* f : {"intervals.json", "patterns.json", "matrix.csv", "matrix.csv.json", "report.json", "patterns.svg"})
        EXPECT_EQ(slurp(p / f), slurp(s / f)) << f;
}

TEST_F(Cli, StricterThresholdsGiveSubset) {
    const auto iv = dir / "iv.json";
    ASSERT_EQ(run(config() + "abstract" + synth_inputs() + " --out " + iv.string()).code, 0);
    const auto loose = dir / "loose.json", strict = dir / "strict.json";
    ASSERT_EQ(run("mine --intervals " + iv.string() + " --risk-threshold 1.5 --minsup 0.01 --out " + loose.string()).code, 0);
    ASSERT_EQ(run("mine --intervals " + iv.string() + " --risk-threshold 2 --minsup 0.03 --out " + strict.string()).code, 0);
    const auto l = keys(loose), s = keys(strict);
    EXPECT_FALSE(s.empty());
    for (const auto& k : s) EXPECT_TRUE(l.count(k)) << k;
}

TEST_F(Cli, EvaluateWithoutColumnsFails) {
    const auto iv = dir / "iv0.json", pat = dir / "none.json", mat = dir / "none.csv";
    ASSERT_EQ(run(config() + "abstract" + synth_inputs() + " --out " + iv.string()).code, 0);
    ASSERT_EQ(run("mine --intervals " + iv.string() + " --risk-threshold 1000 --out " + pat.string()).code, 0);
    ASSERT_EQ(run("matrix --intervals " + iv.string() + " --patterns " + pat.string() + " --out " + mat.string()).code, 0);
    const auto r = run("evaluate --matrix " + mat.string() + " --out " + (dir / "r0.json").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("C-index undefined"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrors) {
    EXPECT_NE(run("mine --bogus").code, 0);
    EXPECT_NE(run("").code, 0);
    EXPECT_NE(run("mine --intervals /nonexistent/x.json --out y.json").code, 0);
    EXPECT_NE(run("pipeline" + synth_inputs() + " --out-dir " + (dir / "noconf").string()).code, 0);
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{not json";
    const auto r = run("mine --intervals " + bad.string() + " --out " + (dir / "x.json").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

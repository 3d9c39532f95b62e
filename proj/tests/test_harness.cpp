#include "duelay/cli.hpp"
#include "duelay/harness.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace duelay;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(Algo algo = Algo::kLinear) {
    ExperimentConfig c;
    c.name = "small";
    c.algo = algo;
    c.horizon = 25;
    c.seeds = {0, 1, 2};
    c.env.dim = 4;
    c.env.arms = 5;
    c.neural.width = 8;
    c.neural.train.epochs = 20;
    return c;
}

// Plays the best arm twice every round.
class OraclePolicy : public DuelingPolicy {
public:
    ArmPair step(const ArmSet& arms, const Environment& env, const DelayModel&, std::uint64_t) override {
        const std::size_t b = env.best_arm(arms);
        return {b, b};
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("duelay_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "duelay");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("config parsing and round trip") {
    const std::string text = R"(# comment
[experiment]
name = "t"
algo = "linear"
variants = ["ipw", "ignore"]
horizon = 30
seeds = [4, 2]
[environment]
reward = "cubic"
dim = 3
arms = 6
[delay]
kind = "geometric"
p = 0.5
threshold = 2
[linear]
beta_scale = 0.1
)";
    const ExperimentConfig c = parse_config(text);
    CHECK(c.name == "t");
    CHECK(c.variants.size() == 2);
    CHECK(c.horizon == 30);
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 2});
    CHECK(c.env.reward == RewardKind::kCubic);
    CHECK(c.delay.model().rho() == doctest::Approx(0.75));
    CHECK(c.linear.beta_scale == 0.1);
    CHECK(render_config(parse_config(render_config(c))) == render_config(c));

    CHECK_THROWS_AS(parse_config("[experiment]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nhorizon = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[experiment]\nhorizon = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[delay]\nkind = \"constant\"\nconstant = 5\nthreshold = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[linear]\nlambda = 0.01\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/duelay.toml"), ConfigError);

    for (const char* s : {"linear", "quadratic", "cubic"}) {
        const ExperimentConfig d = demo_config(s);
        CHECK_NOTHROW(d.validate());
        CHECK(d.env.dim == 20);
        CHECK(d.env.arms == 20);
    }
    CHECK(demo_config("linear").horizon == 2000);
    CHECK(demo_config("quadratic").horizon == 500);
    CHECK_THROWS_AS(demo_config("quartic"), std::invalid_argument);
}

TEST_CASE("shipped config files describe the built-in demos") {
    const std::filesystem::path dir = DUELAY_CONFIG_DIR;
    for (const char* s : {"linear", "quadratic", "cubic"}) {
        CAPTURE(s);
        const ExperimentConfig file = load_config(dir / ("demo_" + std::string(s) + ".toml"));
        CHECK(render_config(file) == render_config(demo_config(s)));
    }
}

TEST_CASE("run_single: base case, determinism and trace consistency") {
    ExperimentConfig c = small_config();
    c.horizon = 1;
    const RegretTrace one = run_single(c, Variant::kIpw, 0);
    REQUIRE(one.cumulative.size() == 1);
    CHECK(one.cumulative[0] == one.instantaneous[0]);

    for (Algo algo : {Algo::kLinear, Algo::kNeural}) {
        const ExperimentConfig cfg = small_config(algo);
        for (Variant v : {Variant::kIpw, Variant::kIgnore, Variant::kHeuristic}) {
            const RegretTrace a = run_single(cfg, v, 3);
            const RegretTrace b = run_single(cfg, v, 3);
            CHECK(a.instantaneous == b.instantaneous);
            double sum = 0.0;
            for (std::size_t i = 0; i < a.instantaneous.size(); ++i) {
                CHECK(a.instantaneous[i] >= 0.0);
                sum += a.instantaneous[i];
                CHECK(std::abs(a.cumulative[i] - sum) <= 1e-9);
            }
        }
    }
}

TEST_CASE("oracle policy has zero regret") {
    Environment env(RewardKind::kQuadratic, 4, 6, 1);
    OraclePolicy oracle;
    const RegretTrace tr = run_policy(oracle, env, DelayModel::geometric(0.3, 3), 100, 1);
    CHECK(tr.final_regret() == 0.0);
}

TEST_CASE("common random numbers across variants") {
    const ExperimentConfig c = small_config();
    std::vector<std::vector<Mat>> seen(3);
    std::vector<std::vector<DuelRecord>> outcomes(3);
    const Environment env(c.env.reward, c.env.dim, c.env.arms, 5);
    const DelayModel delay = c.delay.model();
    int idx = 0;
    for (Variant v : {Variant::kIpw, Variant::kIgnore, Variant::kHeuristic}) {
        auto pol = make_policy(c, v, 5);
        run_policy(*pol, env, delay, c.horizon, 5, [&](std::int64_t, const ArmSet& arms, ArmPair, double) {
            seen[idx].push_back(arms.arms);
            // The same pair replayed under each variant gets the same outcome.
            outcomes[idx].push_back(play_duel(arms, {0, 1}, env, delay, 5));
        });
        ++idx;
    }
    for (int i = 1; i < 3; ++i) {
        CHECK(seen[i] == seen[0]);
        for (std::size_t t = 0; t < outcomes[0].size(); ++t) {
            CHECK(outcomes[i][t].preference == outcomes[0][t].preference);
            CHECK(outcomes[i][t].delay == outcomes[0][t].delay);
        }
    }
}

TEST_CASE("suite outputs: row counts, aggregation, permutation invariance, parallelism") {
    ExperimentConfig c = small_config();
    const SuiteResult r = run_suite(c, 1);
    CHECK(r.failures.empty());
    const std::string csv = traces_csv(r.traces);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "algo,variant,seed,t,inst_regret,cum_regret");
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 3 * 3 * 25);

    const auto j = nlohmann::json::parse(summary_json(c, r));
    REQUIRE(j["variants"].size() == 3);
    for (std::size_t v = 0; v < 3; ++v) {
        double mean = 0.0;
        for (std::size_t s = 0; s < 3; ++s) mean += r.traces[v * 3 + s].final_regret();
        mean /= 3.0;
        CHECK(std::abs(j["variants"][v]["mean_final_regret"].get<double>() - mean) <= 1e-9);
        CHECK(j["variants"][v]["mean_curve"].size() == 25);
    }

    ExperimentConfig shuffled = c;
    shuffled.seeds = {2, 0, 1};
    CHECK(summary_json(shuffled, run_suite(shuffled, 1)) == summary_json(c, r));
    CHECK(traces_csv(run_suite(c, 3).traces) == csv);
}

TEST_CASE("summary statistics") {
    RegretTrace a, b;
    a.cumulative = {1.0, 3.0};
    a.instantaneous = {1.0, 2.0};
    b.cumulative = {2.0, 5.0};
    b.instantaneous = {2.0, 3.0};
    const VariantSummary s = summarize({&a, &b});
    CHECK(s.runs == 2);
    CHECK(s.mean_final == doctest::Approx(4.0));
    CHECK(s.stderr_final == doctest::Approx(std::sqrt(2.0) / std::sqrt(2.0)));
    CHECK(summarize({&a}).stderr_final == 0.0);
}

TEST_CASE("seed offset from the environment") {
    ExperimentConfig c = small_config();
    c.seeds = {3, 1, 3};
    ::setenv("DUELAY_SEED_OFFSET", "10", 1);
    CHECK(resolve_seeds(c) == std::vector<std::uint64_t>{11, 13});
    ::setenv("DUELAY_SEED_OFFSET", "x", 1);
    CHECK_THROWS_AS(resolve_seeds(c), ConfigError);
    ::unsetenv("DUELAY_SEED_OFFSET");
    CHECK(resolve_seeds(c) == std::vector<std::uint64_t>{1, 3});
}

TEST_CASE("write_outputs reports unwritable paths") {
    const ExperimentConfig c = small_config();
    SuiteResult r;
    CHECK_THROWS_AS(write_outputs(c, r, "/proc/duelay/nope"), std::runtime_error);
}

TEST_CASE("cli: check, run determinism and error codes") {
    const fs::path dir = scratch_dir("cli");
    const fs::path cfg = dir / "c.toml";
    ExperimentConfig c = small_config();
    c.output_dir = dir / "out";
    {
        std::ofstream f(cfg);
        f << render_config(c);
    }
    std::string out, err;
    CHECK(run_cli({"check", "--config", cfg.string()}, &out) == 0);
    CHECK(out.find("rho") != std::string::npos);

    CHECK(run_cli({"run", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
    CHECK(run_cli({"run", "--config", cfg.string(), "--out", (dir / "b").string()}) == 0);
    CHECK(slurp(dir / "a" / "traces.csv") == slurp(dir / "b" / "traces.csv"));
    CHECK(slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json"));
    CHECK(nlohmann::json::accept(slurp(dir / "a" / "summary.json")));

    const fs::path low = dir / "low.toml";
    {
        std::ofstream f(low);
        f << "[linear]\nlambda = 0.3\n";
    }
    CHECK(run_cli({"check", "--config", low.string()}, &out, &err) == 1);
    CHECK((out + err).find("kappa_mu * L^2") != std::string::npos);

    CHECK(run_cli({"run", "--bogus"}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"check", "--config", (dir / "missing.toml").string()}) == 1);
    CHECK(run_cli({"demo", "--setting", "quartic", "--out", dir.string()}) == 1);
    CHECK(run_cli({"run", "--config", cfg.string(), "--out", "/proc/duelay/nope"}) == 2);
}

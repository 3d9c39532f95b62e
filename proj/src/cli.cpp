#include "duelay/cli.hpp"

#include "duelay/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <string>
#include <vector>

namespace duelay {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

int execute(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs, std::ostream& out,
            std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const SuiteResult result = run_suite(cfg, jobs);
    write_outputs(cfg, result, out_dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& s : result.summaries) {
        out << to_string(s.algo) << "/" << to_string(s.variant) << ": mean R_T = " << s.mean_final << " +- "
            << s.stderr_final << " (" << s.runs << " runs)\n";
    }
    out << "wrote " << (out_dir / "traces.csv").string() << " and " << (out_dir / "summary.json").string() << " in "
        << secs << " s\n";
    for (const auto& f : result.failures) {
        err << "run failed: variant " << to_string(f.variant) << ", seed " << f.seed << ": " << f.message << "\n";
    }
    return result.failures.empty() ? kOk : kRuntimeError;
}

int check(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    const DelayModel model = cfg.delay.model();
    out << "experiment: " << cfg.name << " (" << to_string(cfg.algo) << ", T = " << cfg.horizon << ", "
        << cfg.seeds.size() << " seeds)\n";
    out << "delay: " << to_string(model.kind()) << ", M = " << model.threshold() << ", rho = " << model.rho() << "\n";
    if (cfg.algo == Algo::kLinear) {
        const auto& l = cfg.linear;
        const double bound = l.kappa_mu * l.feature_bound * l.feature_bound;
        out << "kappa_mu = " << l.kappa_mu << ", lambda = " << l.lambda << ", kappa_mu * L^2 = " << bound << "\n";
        if (!(l.lambda > bound)) {
            err << "lambda-condition violated: lambda must exceed kappa_mu * L^2 (" << l.lambda << " <= " << bound
                << ") for the linear regret guarantee\n";
            return kConfigError;
        }
        out << "lambda-condition: ok (lambda > kappa_mu * L^2)\n";
    } else {
        const auto& n = cfg.neural;
        out << "kappa_mu = " << n.kappa() << ", lambda = " << n.lambda << ", width = " << n.width
            << ", depth = " << n.depth << "\n";
        out << "lambda-condition: ok (lambda > 0)\n";
    }
    return kOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dueling bandits with delayed feedback: simulation runner", "duelay"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "Run every (variant, seed) in a config file");
    run->add_option("--config", config_path, "Experiment config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
    run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    auto* chk = app.add_subcommand("check", "Validate a config and print resolved constants");
    chk->add_option("--config", config_path, "Experiment config file")->required();

    std::string setting;
    auto* demo = app.add_subcommand("demo", "Run a built-in synthetic setting");
    demo->add_option("--setting", setting, "linear, quadratic or cubic")
        ->required()
        ->check(CLI::IsMember({"linear", "quadratic", "cubic"}));
    demo->add_option("--out", out_dir, "Output directory")->required();
    demo->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kConfigError;
    }

    try {
        if (*chk) return check(load_config(config_path), out, err);
        if (*run) {
            const ExperimentConfig cfg = load_config(config_path);
            return execute(cfg, out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir), jobs, out, err);
        }
        if (*demo) {
            ExperimentConfig cfg = demo_config(setting);
            cfg.output_dir = out_dir;
            return execute(cfg, out_dir, jobs, out, err);
        }
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kConfigError;
}

}  // namespace duelay

#pragma once

#include "duelay/delay.hpp"
#include "duelay/environment.hpp"
#include "duelay/linear_policy.hpp"
#include "duelay/neural_policy.hpp"
#include "duelay/policy.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace duelay {

/// Invalid or unreadable experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Algo { kLinear, kNeural };

std::string_view to_string(Algo a);

struct EnvSpec {
    RewardKind reward = RewardKind::kLinear;
    int dim = 20;
    int arms = 20;
};

struct DelaySpec {
    DelayModel::Kind kind = DelayModel::Kind::kGeometric;
    double p = 0.3;
    int constant = 1;
    int threshold = 3;

    DelayModel model() const;
};

struct ExperimentConfig {
    std::string name = "experiment";
    Algo algo = Algo::kLinear;
    std::vector<Variant> variants{Variant::kIpw, Variant::kIgnore, Variant::kHeuristic};
    std::int64_t horizon = 1000;
    std::vector<std::uint64_t> seeds{0};
    EnvSpec env;
    DelaySpec delay;
    LinearPolicyConfig linear;  // threshold/rho/variant are filled from delay and run
    NeuralPolicyConfig neural;
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError.
    void validate() const;
    LinearPolicyConfig linear_for(Variant v) const;
    NeuralPolicyConfig neural_for(Variant v) const;
};

/// Parse the INI-style experiment file (a TOML subset: [sections],
/// key = value, quoted strings, [a, b] arrays, # comments).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Render a config back to the file format; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& cfg);

/// Built-in synthetic settings: "linear", "quadratic", "cubic".
ExperimentConfig demo_config(const std::string& setting);

/// Seeds with DUELAY_SEED_OFFSET added, sorted ascending and de-duplicated.
std::vector<std::uint64_t> resolve_seeds(const ExperimentConfig& cfg);

struct RegretTrace {
    Algo algo = Algo::kLinear;
    Variant variant = Variant::kIpw;
    std::uint64_t seed = 0;
    std::vector<double> instantaneous;
    std::vector<double> cumulative;

    double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Called after each round with (t, pair played, regret of the round).
using RoundObserver = std::function<void(std::int64_t, const ArmSet&, ArmPair, double)>;

std::unique_ptr<DuelingPolicy> make_policy(const ExperimentConfig& cfg, Variant v, std::uint64_t seed);

/// Play `horizon` rounds of `policy`; regret is scored by the environment.
RegretTrace run_policy(DuelingPolicy& policy, const Environment& env, const DelayModel& delay,
                       std::int64_t horizon, std::uint64_t seed, const RoundObserver& observer = {});

/// One seeded run of the configured algorithm and variant.
RegretTrace run_single(const ExperimentConfig& cfg, Variant v, std::uint64_t seed);

struct VariantSummary {
    Algo algo = Algo::kLinear;
    Variant variant = Variant::kIpw;
    std::size_t runs = 0;
    double mean_final = 0.0;
    double stderr_final = 0.0;
    std::vector<double> mean_curve;
    std::vector<double> stderr_curve;
};

struct RunFailure {
    Variant variant = Variant::kIpw;
    std::uint64_t seed = 0;
    std::string message;
};

struct SuiteResult {
    std::vector<RegretTrace> traces;  // variant-major, seeds ascending
    std::vector<VariantSummary> summaries;
    std::vector<RunFailure> failures;
};

/// Mean and standard error (sample sd / sqrt(n); 0 for one run) across traces.
VariantSummary summarize(const std::vector<const RegretTrace*>& traces);

/// Every (variant, seed) run, `jobs` at a time. Seeds of all variants share
/// streams, so comparisons use common random numbers.
SuiteResult run_suite(const ExperimentConfig& cfg, int jobs = 1);

/// algo,variant,seed,t,inst_regret,cum_regret with 17 significant digits.
std::string traces_csv(const std::vector<RegretTrace>& traces);
std::string summary_json(const ExperimentConfig& cfg, const SuiteResult& result);

/// Writes traces.csv and summary.json under `dir`; std::runtime_error with
/// the path on IO failure.
void write_outputs(const ExperimentConfig& cfg, const SuiteResult& result, const std::filesystem::path& dir);

}  // namespace duelay

#include "duelay/harness.hpp"

#include <json.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace duelay {

namespace pt = boost::property_tree;

std::string_view to_string(Algo a) { return a == Algo::kLinear ? "linear" : "neural"; }

DelayModel DelaySpec::model() const {
    switch (kind) {
        case DelayModel::Kind::kNone: return DelayModel::none(threshold);
        case DelayModel::Kind::kGeometric: return DelayModel::geometric(p, threshold);
        case DelayModel::Kind::kConstant: return DelayModel::constant(constant, threshold);
    }
    return DelayModel::none(threshold);
}

LinearPolicyConfig ExperimentConfig::linear_for(Variant v) const {
    LinearPolicyConfig c = linear;
    c.threshold = delay.threshold;
    c.rho = delay.model().rho();
    c.variant = v;
    return c;
}

NeuralPolicyConfig ExperimentConfig::neural_for(Variant v) const {
    NeuralPolicyConfig c = neural;
    c.threshold = delay.threshold;
    c.rho = delay.model().rho();
    c.variant = v;
    return c;
}

void ExperimentConfig::validate() const {
    try {
        if (horizon < 1) throw ConfigError("horizon must be >= 1");
        if (seeds.empty()) throw ConfigError("at least one seed is required");
        if (variants.empty()) throw ConfigError("at least one variant is required");
        if (env.dim < 1) throw ConfigError("environment dim must be >= 1");
        if (env.arms < 2) throw ConfigError("environment needs at least 2 arms");
        (void)delay.model();
        if (algo == Algo::kLinear) {
            linear_for(Variant::kIpw).validate();
        } else {
            neural_for(Variant::kIpw).validate();
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
    s = trim(std::move(s));
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

/// Drops a trailing "# comment" outside quotes.
std::string strip_comment(const std::string& s) {
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return trim(s.substr(0, i));
        }
    }
    return trim(s);
}

std::vector<std::string> parse_list(const std::string& raw) {
    std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
        throw ConfigError("expected a [a, b, ...] list, got '" + raw + "'");
    }
    s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::string raw(const std::string& key) const {
        auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
        if (!v) throw ConfigError("missing key '" + key + "'");
        return strip_comment(*v);
    }
    bool has(const std::string& key) const {
        return static_cast<bool>(tree_.get_optional<std::string>(pt::ptree::path_type(key, '.')));
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        return has(key) ? unquote(raw(key)) : fallback;
    }
    double num(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const std::string s = unquote(raw(key));
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
        }
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string s = unquote(raw(key));
        try {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
        }
    }

private:
    const pt::ptree& tree_;
};

void check_known_keys(const pt::ptree& tree) {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
        {"experiment", {"name", "algo", "variants", "horizon", "seeds", "num_seeds"}},
        {"environment", {"reward", "dim", "arms"}},
        {"delay", {"kind", "p", "constant", "threshold"}},
        {"linear", {"lambda", "kappa_mu", "delta", "feature_bound", "beta_scale", "grad_tol", "max_newton_iters"}},
        {"neural",
         {"lambda", "kappa_mu", "delta", "norm_bound", "width", "depth", "learning_rate", "epochs", "grad_tol",
          "nu_scale"}},
        {"output", {"dir"}},
    };
    for (const auto& [section, body] : tree) {
        auto it = std::find_if(known.begin(), known.end(), [&](const auto& k) { return k.first == section; });
        if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
                throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    check_known_keys(tree);
    Reader r(tree);
    ExperimentConfig c;
    c.name = r.str("experiment.name", c.name);
    const std::string algo = r.str("experiment.algo", "linear");
    if (algo == "linear") {
        c.algo = Algo::kLinear;
    } else if (algo == "neural") {
        c.algo = Algo::kNeural;
    } else {
        throw ConfigError("experiment.algo must be 'linear' or 'neural', got '" + algo + "'");
    }
    if (r.has("experiment.variants")) {
        c.variants.clear();
        for (const auto& v : parse_list(r.raw("experiment.variants"))) {
            try {
                c.variants.push_back(parse_variant(v));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    c.horizon = r.integer("experiment.horizon", c.horizon);
    if (r.has("experiment.seeds") && r.has("experiment.num_seeds")) {
        throw ConfigError("give either experiment.seeds or experiment.num_seeds, not both");
    }
    if (r.has("experiment.seeds")) {
        c.seeds.clear();
        for (const auto& s : parse_list(r.raw("experiment.seeds"))) {
            try {
                std::size_t used = 0;
                const long long v = std::stoll(s, &used);
                if (used != s.size() || v < 0) throw std::invalid_argument(s);
                c.seeds.push_back(static_cast<std::uint64_t>(v));
            } catch (const std::exception&) {
                throw ConfigError("experiment.seeds: bad seed '" + s + "'");
            }
        }
    } else if (r.has("experiment.num_seeds")) {
        const auto n = r.integer("experiment.num_seeds", 1);
        if (n < 1) throw ConfigError("experiment.num_seeds must be >= 1");
        c.seeds.resize(static_cast<std::size_t>(n));
        std::iota(c.seeds.begin(), c.seeds.end(), 0);
    }

    try {
        c.env.reward = parse_reward_kind(r.str("environment.reward", "linear"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.env.dim = static_cast<int>(r.integer("environment.dim", c.env.dim));
    c.env.arms = static_cast<int>(r.integer("environment.arms", c.env.arms));

    const std::string kind = r.str("delay.kind", "geometric");
    if (kind == "none") {
        c.delay.kind = DelayModel::Kind::kNone;
        c.delay.threshold = 1;
    } else if (kind == "geometric") {
        c.delay.kind = DelayModel::Kind::kGeometric;
    } else if (kind == "constant") {
        c.delay.kind = DelayModel::Kind::kConstant;
    } else {
        throw ConfigError("delay.kind must be none, geometric or constant, got '" + kind + "'");
    }
    c.delay.p = r.num("delay.p", c.delay.p);
    c.delay.constant = static_cast<int>(r.integer("delay.constant", c.delay.constant));
    c.delay.threshold = static_cast<int>(r.integer("delay.threshold", c.delay.threshold));

    auto& lin = c.linear;
    lin.lambda = r.num("linear.lambda", lin.lambda);
    lin.kappa_mu = r.num("linear.kappa_mu", lin.kappa_mu);
    lin.delta = r.num("linear.delta", lin.delta);
    lin.feature_bound = r.num("linear.feature_bound", lin.feature_bound);
    lin.beta_scale = r.num("linear.beta_scale", lin.beta_scale);
    lin.grad_tol = r.num("linear.grad_tol", lin.grad_tol);
    lin.max_newton_iters = static_cast<int>(r.integer("linear.max_newton_iters", lin.max_newton_iters));

    auto& neu = c.neural;
    neu.lambda = r.num("neural.lambda", neu.lambda);
    neu.kappa_mu = r.num("neural.kappa_mu", neu.kappa_mu);
    neu.delta = r.num("neural.delta", neu.delta);
    neu.norm_bound = r.num("neural.norm_bound", neu.norm_bound);
    neu.width = static_cast<int>(r.integer("neural.width", neu.width));
    neu.depth = static_cast<int>(r.integer("neural.depth", neu.depth));
    neu.train.learning_rate = r.num("neural.learning_rate", neu.train.learning_rate);
    neu.train.epochs = static_cast<int>(r.integer("neural.epochs", neu.train.epochs));
    neu.train.grad_tol = r.num("neural.grad_tol", neu.train.grad_tol);
    neu.nu_scale = r.num("neural.nu_scale", neu.nu_scale);

    c.output_dir = r.str("output.dir", c.output_dir.string());
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string render_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "[experiment]\n";
    o << "name = \"" << c.name << "\"\n";
    o << "algo = \"" << to_string(c.algo) << "\"\n";
    o << "variants = [";
    for (std::size_t i = 0; i < c.variants.size(); ++i) o << (i ? ", " : "") << '"' << to_string(c.variants[i]) << '"';
    o << "]\n";
    o << "horizon = " << c.horizon << "\n";
    o << "seeds = [";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) o << (i ? ", " : "") << c.seeds[i];
    o << "]\n\n";
    o << "[environment]\nreward = \"" << to_string(c.env.reward) << "\"\ndim = " << c.env.dim
      << "\narms = " << c.env.arms << "\n\n";
    o << "[delay]\nkind = \"" << to_string(c.delay.kind) << "\"\np = " << fmt17(c.delay.p)
      << "\nconstant = " << c.delay.constant << "\nthreshold = " << c.delay.threshold << "\n\n";
    const auto& l = c.linear;
    o << "[linear]\nlambda = " << fmt17(l.lambda) << "\nkappa_mu = " << fmt17(l.kappa_mu)
      << "\ndelta = " << fmt17(l.delta) << "\nfeature_bound = " << fmt17(l.feature_bound)
      << "\nbeta_scale = " << fmt17(l.beta_scale) << "\ngrad_tol = " << fmt17(l.grad_tol)
      << "\nmax_newton_iters = " << l.max_newton_iters << "\n\n";
    const auto& n = c.neural;
    o << "[neural]\nlambda = " << fmt17(n.lambda) << "\nkappa_mu = " << fmt17(n.kappa_mu)
      << "\ndelta = " << fmt17(n.delta) << "\nnorm_bound = " << fmt17(n.norm_bound) << "\nwidth = " << n.width
      << "\ndepth = " << n.depth << "\nlearning_rate = " << fmt17(n.train.learning_rate)
      << "\nepochs = " << n.train.epochs << "\ngrad_tol = " << fmt17(n.train.grad_tol)
      << "\nnu_scale = " << fmt17(n.nu_scale) << "\n\n";
    o << "[output]\ndir = \"" << c.output_dir.string() << "\"\n";
    return o.str();
}

ExperimentConfig demo_config(const std::string& setting) {
    ExperimentConfig c;
    c.env.dim = 20;
    c.env.arms = 20;
    c.delay.kind = DelayModel::Kind::kGeometric;
    c.delay.p = 0.3;
    c.delay.threshold = 3;
    if (setting == "linear") {
        c.name = "demo_linear";
        c.algo = Algo::kLinear;
        c.env.reward = RewardKind::kLinear;
        c.horizon = 2000;
        c.seeds.resize(20);
        c.linear.beta_scale = 0.1;
    } else if (setting == "quadratic" || setting == "cubic") {
        c.name = "demo_" + setting;
        c.algo = Algo::kNeural;
        c.env.reward = parse_reward_kind(setting);
        c.horizon = 500;
        c.seeds.resize(10);
    } else {
        throw ConfigError("unknown demo setting '" + setting + "' (expected linear, quadratic or cubic)");
    }
    std::iota(c.seeds.begin(), c.seeds.end(), 0);
    c.output_dir = "out/" + c.name;
    c.validate();
    return c;
}

std::vector<std::uint64_t> resolve_seeds(const ExperimentConfig& cfg) {
    std::int64_t offset = 0;
    if (const char* env = std::getenv("DUELAY_SEED_OFFSET"); env && *env) {
        try {
            std::size_t used = 0;
            offset = std::stoll(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            throw ConfigError(std::string("DUELAY_SEED_OFFSET must be an integer, got '") + env + "'");
        }
    }
    std::vector<std::uint64_t> out;
    out.reserve(cfg.seeds.size());
    for (auto s : cfg.seeds) out.push_back(s + static_cast<std::uint64_t>(offset));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::unique_ptr<DuelingPolicy> make_policy(const ExperimentConfig& cfg, Variant v, std::uint64_t seed) {
    if (cfg.algo == Algo::kLinear) return std::make_unique<LinearPolicy>(cfg.env.dim, cfg.linear_for(v));
    return std::make_unique<NeuralPolicy>(cfg.env.dim, cfg.neural_for(v), seed);
}

RegretTrace run_policy(DuelingPolicy& policy, const Environment& env, const DelayModel& delay,
                       std::int64_t horizon, std::uint64_t seed, const RoundObserver& observer) {
    RegretTrace trace;
    trace.seed = seed;
    trace.instantaneous.reserve(static_cast<std::size_t>(horizon));
    trace.cumulative.reserve(static_cast<std::size_t>(horizon));
    double total = 0.0;
    for (std::int64_t t = 1; t <= horizon; ++t) {
        const ArmSet arms = env.draw_arms(t);
        const ArmPair pair = policy.step(arms, env, delay, seed);
        const double r = env.instantaneous_regret(arms, pair.first, pair.second);
        total += r;
        trace.instantaneous.push_back(r);
        trace.cumulative.push_back(total);
        if (observer) observer(t, arms, pair, r);
    }
    return trace;
}

RegretTrace run_single(const ExperimentConfig& cfg, Variant v, std::uint64_t seed) {
    cfg.validate();
    const Environment env(cfg.env.reward, cfg.env.dim, cfg.env.arms, seed);
    const DelayModel delay = cfg.delay.model();
    auto policy = make_policy(cfg, v, seed);
    RegretTrace trace = run_policy(*policy, env, delay, cfg.horizon, seed);
    trace.algo = cfg.algo;
    trace.variant = v;
    return trace;
}

VariantSummary summarize(const std::vector<const RegretTrace*>& traces) {
    VariantSummary s;
    if (traces.empty()) return s;
    s.algo = traces.front()->algo;
    s.variant = traces.front()->variant;
    s.runs = traces.size();
    const std::size_t len = traces.front()->cumulative.size();
    const double n = static_cast<double>(traces.size());
    s.mean_curve.assign(len, 0.0);
    s.stderr_curve.assign(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        double mean = 0.0;
        for (const auto* tr : traces) mean += tr->cumulative[t];
        mean /= n;
        double ss = 0.0;
        for (const auto* tr : traces) ss += (tr->cumulative[t] - mean) * (tr->cumulative[t] - mean);
        s.mean_curve[t] = mean;
        s.stderr_curve[t] = traces.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    }
    if (len > 0) {
        s.mean_final = s.mean_curve.back();
        s.stderr_final = s.stderr_curve.back();
    }
    return s;
}

SuiteResult run_suite(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    const auto seeds = resolve_seeds(cfg);
    struct Task {
        Variant variant;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (auto v : cfg.variants)
        for (auto s : seeds) tasks.push_back({v, s});

    std::vector<RegretTrace> traces(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                traces[i] = run_single(cfg, tasks[i].variant, tasks[i].seed);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SuiteResult out;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!errors[i].empty()) {
            out.failures.push_back({tasks[i].variant, tasks[i].seed, errors[i]});
        } else {
            out.traces.push_back(std::move(traces[i]));
        }
    }
    for (auto v : cfg.variants) {
        std::vector<const RegretTrace*> group;
        for (const auto& tr : out.traces)
            if (tr.variant == v) group.push_back(&tr);
        if (!group.empty()) out.summaries.push_back(summarize(group));
    }
    return out;
}

std::string traces_csv(const std::vector<RegretTrace>& traces) {
    std::string out = "algo,variant,seed,t,inst_regret,cum_regret\n";
    char buf[160];
    for (const auto& tr : traces) {
        const std::string prefix =
            std::string(to_string(tr.algo)) + "," + std::string(to_string(tr.variant)) + "," + std::to_string(tr.seed);
        for (std::size_t i = 0; i < tr.instantaneous.size(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%zu,%.17g,%.17g\n", i + 1, tr.instantaneous[i], tr.cumulative[i]);
            out += prefix;
            out += buf;
        }
    }
    return out;
}

std::string summary_json(const ExperimentConfig& cfg, const SuiteResult& result) {
    nlohmann::ordered_json j;
    j["name"] = cfg.name;
    j["algo"] = std::string(to_string(cfg.algo));
    j["horizon"] = cfg.horizon;
    j["environment"] = {{"reward", std::string(to_string(cfg.env.reward))},
                        {"dim", cfg.env.dim},
                        {"arms", cfg.env.arms}};
    const DelayModel model = cfg.delay.model();
    j["delay"] = {{"kind", std::string(to_string(cfg.delay.kind))},
                  {"p", cfg.delay.p},
                  {"constant", cfg.delay.constant},
                  {"threshold", cfg.delay.threshold},
                  {"rho", model.rho()}};
    j["seeds"] = resolve_seeds(cfg);
    auto variants = nlohmann::ordered_json::array();
    for (const auto& s : result.summaries) {
        variants.push_back({{"variant", std::string(to_string(s.variant))},
                            {"runs", s.runs},
                            {"mean_final_regret", s.mean_final},
                            {"stderr_final_regret", s.stderr_final},
                            {"mean_curve", s.mean_curve},
                            {"stderr_curve", s.stderr_curve}});
    }
    j["variants"] = variants;
    auto failures = nlohmann::ordered_json::array();
    for (const auto& f : result.failures) {
        failures.push_back({{"variant", std::string(to_string(f.variant))}, {"seed", f.seed}, {"error", f.message}});
    }
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

void write_outputs(const ExperimentConfig& cfg, const SuiteResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    auto write = [](const std::filesystem::path& p, const std::string& body) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
        out << body;
        if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
    };
    write(dir / "traces.csv", traces_csv(result.traces));
    write(dir / "summary.json", summary_json(cfg, result));
}

}  // namespace duelay

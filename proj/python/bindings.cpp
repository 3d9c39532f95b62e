#include "duelay/delay.hpp"
#include "duelay/environment.hpp"
#include "duelay/harness.hpp"
#include "duelay/linalg.hpp"
#include "duelay/linear_mle.hpp"
#include "duelay/linear_policy.hpp"
#include "duelay/neural_policy.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace duelay;

namespace {

py::dict summary_dict(const VariantSummary& s) {
    py::dict d;
    d["algo"] = std::string(to_string(s.algo));
    d["variant"] = std::string(to_string(s.variant));
    d["runs"] = s.runs;
    d["mean_final"] = s.mean_final;
    d["stderr_final"] = s.stderr_final;
    d["mean_curve"] = s.mean_curve;
    d["stderr_curve"] = s.stderr_curve;
    return d;
}

}  // namespace

PYBIND11_MODULE(_duelay, m) {
    m.doc() = "Dueling bandits with delayed preference feedback";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def("sigmoid", &sigmoid, py::arg("z"));
    m.def("default_kappa_mu", &default_kappa_mu, py::arg("theta_bound") = 1.0, py::arg("feature_bound") = 2.0);

    py::enum_<Variant>(m, "Variant")
        .value("IPW", Variant::kIpw)
        .value("IGNORE", Variant::kIgnore)
        .value("HEURISTIC", Variant::kHeuristic);
    py::enum_<Algo>(m, "Algo").value("LINEAR", Algo::kLinear).value("NEURAL", Algo::kNeural);
    py::enum_<RewardKind>(m, "RewardKind")
        .value("LINEAR", RewardKind::kLinear)
        .value("QUADRATIC", RewardKind::kQuadratic)
        .value("CUBIC", RewardKind::kCubic);

    py::class_<DelayModel> delay(m, "DelayModel");
    py::enum_<DelayModel::Kind>(delay, "Kind")
        .value("NONE", DelayModel::Kind::kNone)
        .value("GEOMETRIC", DelayModel::Kind::kGeometric)
        .value("CONSTANT", DelayModel::Kind::kConstant);
    delay.def_static("none", &DelayModel::none, py::arg("threshold") = 1)
        .def_static("geometric", &DelayModel::geometric, py::arg("p"), py::arg("threshold"))
        .def_static("constant", &DelayModel::constant, py::arg("c"), py::arg("threshold"))
        .def_property_readonly("kind", &DelayModel::kind)
        .def_property_readonly("threshold", &DelayModel::threshold)
        .def_property_readonly("rho", &DelayModel::rho)
        .def("sample", [](const DelayModel& d, std::uint64_t seed, std::int64_t t) {
            StreamRng rng = make_stream(seed, "delay", static_cast<std::uint64_t>(t));
            return d.sample(rng);
        }, py::arg("seed"), py::arg("t"));
    m.def("ipw_weight", &ipw_weight, py::arg("s"), py::arg("t"), py::arg("delay"), py::arg("threshold"),
          py::arg("rho"));

    py::class_<InfoMatrix>(m, "InfoMatrix")
        .def(py::init<Eigen::Index, double>(), py::arg("dim"), py::arg("ridge"))
        .def("rank_one_update", &InfoMatrix::rank_one_update, py::arg("v"), py::arg("scale") = 1.0)
        .def("weighted_norm", &InfoMatrix::weighted_norm, py::arg("v"), py::arg("use_inverse"))
        .def_property_readonly("matrix", &InfoMatrix::matrix)
        .def_property_readonly("inverse", &InfoMatrix::inverse)
        .def_property_readonly("logdet", &InfoMatrix::logdet);

    py::class_<ArmSet>(m, "ArmSet").def_readonly("arms", &ArmSet::arms).def("__len__", &ArmSet::size);

    py::class_<Environment>(m, "Environment")
        .def(py::init<RewardKind, int, int, std::uint64_t>(), py::arg("kind"), py::arg("dim"), py::arg("num_arms"),
             py::arg("seed"))
        .def_property_readonly("theta_star", &Environment::theta_star)
        .def("draw_arms", &Environment::draw_arms, py::arg("t"))
        .def("reward", &Environment::reward, py::arg("x"))
        .def("instantaneous_regret", &Environment::instantaneous_regret, py::arg("arms"), py::arg("first"),
             py::arg("second"));

    m.def(
        "solve_mle",
        [](const Mat& features, const Vec& labels, double lambda) {
            if (features.rows() != labels.size())
                throw std::invalid_argument("solve_mle: features and labels disagree on the row count");
            ObservedDataset data(features.cols());
            for (Eigen::Index i = 0; i < features.rows(); ++i) data.add(features.row(i).transpose(), labels[i]);
            MleConfig cfg;
            cfg.lambda = lambda;
            return solve_mle(data, cfg, Vec::Zero(features.cols())).theta;
        },
        py::arg("features"), py::arg("labels"), py::arg("lambda_") = 0.5,
        "Minimise the weighted logistic loss; rows of features are preference-feature differences.");

    py::class_<LinearPolicyConfig>(m, "LinearPolicyConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &LinearPolicyConfig::lambda)
        .def_readwrite("delta", &LinearPolicyConfig::delta)
        .def_readwrite("threshold", &LinearPolicyConfig::threshold)
        .def_readwrite("rho", &LinearPolicyConfig::rho)
        .def_readwrite("variant", &LinearPolicyConfig::variant)
        .def_readwrite("beta_scale", &LinearPolicyConfig::beta_scale);
    m.def("beta_t", &beta_t, py::arg("cfg"), py::arg("t"), py::arg("dim"));

    py::class_<LinearPolicy>(m, "LinearPolicy")
        .def(py::init<int, LinearPolicyConfig>(), py::arg("dim"), py::arg("cfg"))
        .def("step", &LinearPolicy::step, py::arg("arms"), py::arg("env"), py::arg("delay"), py::arg("seed"))
        .def_property_readonly("theta", &LinearPolicy::theta)
        .def_property_readonly("round", &LinearPolicy::round)
        .def_property_readonly("information_gain", &LinearPolicy::information_gain);

    py::class_<NeuralPolicyConfig>(m, "NeuralPolicyConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &NeuralPolicyConfig::lambda)
        .def_readwrite("threshold", &NeuralPolicyConfig::threshold)
        .def_readwrite("rho", &NeuralPolicyConfig::rho)
        .def_readwrite("width", &NeuralPolicyConfig::width)
        .def_readwrite("depth", &NeuralPolicyConfig::depth)
        .def_readwrite("variant", &NeuralPolicyConfig::variant)
        .def_readwrite("nu_scale", &NeuralPolicyConfig::nu_scale);

    py::class_<NeuralPolicy>(m, "NeuralPolicy")
        .def(py::init<int, NeuralPolicyConfig, std::uint64_t>(), py::arg("raw_dim"), py::arg("cfg"), py::arg("seed"))
        .def("step", &NeuralPolicy::step, py::arg("arms"), py::arg("env"), py::arg("delay"), py::arg("seed"))
        .def_property_readonly("drift", &NeuralPolicy::drift)
        .def_property_readonly("nu", &NeuralPolicy::nu)
        .def_property_readonly("round", &NeuralPolicy::round);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readwrite("name", &ExperimentConfig::name)
        .def_readwrite("algo", &ExperimentConfig::algo)
        .def_readwrite("variants", &ExperimentConfig::variants)
        .def_readwrite("horizon", &ExperimentConfig::horizon)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def("validate", &ExperimentConfig::validate)
        .def("render", &render_config);
    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("demo_config", &demo_config, py::arg("setting"));

    m.def(
        "run_single",
        [](const ExperimentConfig& cfg, Variant v, std::uint64_t seed) {
            py::gil_scoped_release release;
            return run_single(cfg, v, seed).cumulative;
        },
        py::arg("cfg"), py::arg("variant"), py::arg("seed"), "Cumulative regret curve of one seeded run.");
    m.def(
        "run_suite",
        [](const ExperimentConfig& cfg, int jobs) {
            SuiteResult r;
            {
                py::gil_scoped_release release;
                r = run_suite(cfg, jobs);
            }
            py::list summaries;
            for (const auto& s : r.summaries) summaries.append(summary_dict(s));
            py::list failures;
            for (const auto& f : r.failures)
                failures.append(py::make_tuple(std::string(to_string(f.variant)), f.seed, f.message));
            py::dict out;
            out["summaries"] = summaries;
            out["failures"] = failures;
            out["traces_csv"] = traces_csv(r.traces);
            out["summary_json"] = summary_json(cfg, r);
            return out;
        },
        py::arg("cfg"), py::arg("jobs") = 1);
}

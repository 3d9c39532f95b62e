#include "duelay/environment.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace duelay {

std::string_view to_string(RewardKind kind) {
    switch (kind) {
        case RewardKind::kLinear: return "linear";
        case RewardKind::kQuadratic: return "quadratic";
        case RewardKind::kCubic: return "cubic";
    }
    return "unknown";
}

RewardKind parse_reward_kind(std::string_view name) {
    if (name == "linear") return RewardKind::kLinear;
    if (name == "quadratic") return RewardKind::kQuadratic;
    if (name == "cubic") return RewardKind::kCubic;
    throw std::invalid_argument("unknown reward kind '" + std::string(name) + "'");
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double sigmoid_derivative(double z) {
    const double s = sigmoid(z);
    return s * (1.0 - s);
}

double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

Vec sample_unit_sphere(int dim, StreamRng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(dim);
    double norm = 0.0;
    while (norm == 0.0) {
        for (int i = 0; i < dim; ++i) v[i] = normal(rng);
        norm = v.norm();
    }
    return v / norm;
}

Environment::Environment(RewardKind kind, int dim, int num_arms, std::uint64_t seed)
    : kind_(kind), dim_(dim), num_arms_(num_arms), seed_(seed) {
    if (dim < 1) throw std::invalid_argument("Environment: dimension must be >= 1");
    if (num_arms < 2) throw std::invalid_argument("Environment: need at least 2 arms per round");
    StreamRng rng = make_stream(seed, "theta");
    theta_star_ = sample_unit_sphere(dim, rng);
}

ArmSet Environment::draw_arms(std::int64_t t) const {
    if (t < 1) throw std::invalid_argument("Environment::draw_arms: round must be >= 1");
    StreamRng rng = make_stream(seed_, "arms", static_cast<std::uint64_t>(t));
    ArmSet out;
    out.round = t;
    out.arms.resize(dim_, num_arms_);
    for (int k = 0; k < num_arms_; ++k) {
        const double radius = std::pow(rng.uniform(), 1.0 / dim_);
        out.arms.col(k) = radius * sample_unit_sphere(dim_, rng);
    }
    return out;
}

double Environment::reward(const Vec& x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("Environment::reward: expected dimension " + std::to_string(dim_) +
                                    ", got " + std::to_string(x.size()));
    }
    const double s = theta_star_.dot(x);
    switch (kind_) {
        case RewardKind::kLinear: return s;
        case RewardKind::kQuadratic: return s * s;
        case RewardKind::kCubic: return s * s * s;
    }
    return s;
}

int Environment::sample_preference(const Vec& x1, const Vec& x2, StreamRng& rng) const {
    const double p = sigmoid(reward(x1) - reward(x2));
    return rng.uniform() < p ? 1 : 0;
}

std::size_t Environment::best_arm(const ArmSet& arms) const {
    std::size_t best = 0;
    double best_value = reward(arms.arm(0));
    for (std::size_t i = 1; i < arms.size(); ++i) {
        const double v = reward(arms.arm(i));
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    return best;
}

double Environment::instantaneous_regret(const ArmSet& arms, std::size_t first, std::size_t second) const {
    if (first >= arms.size() || second >= arms.size()) {
        throw std::invalid_argument("Environment::instantaneous_regret: arm index not in the arm set");
    }
    const double best = reward(arms.arm(best_arm(arms)));
    const double r = 2.0 * best - reward(arms.arm(first)) - reward(arms.arm(second));
    return r > 0.0 ? r : 0.0;
}

}  // namespace duelay

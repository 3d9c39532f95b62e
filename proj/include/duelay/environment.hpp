#pragma once

#include "duelay/linalg.hpp"
#include "duelay/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace duelay {

enum class RewardKind { kLinear, kQuadratic, kCubic };

std::string_view to_string(RewardKind kind);
RewardKind parse_reward_kind(std::string_view name);

/// Contexts offered in one round; column i is arm i.
struct ArmSet {
    Mat arms;
    std::int64_t round = 0;

    std::size_t size() const { return static_cast<std::size_t>(arms.cols()); }
    Vec arm(std::size_t i) const { return arms.col(static_cast<Eigen::Index>(i)); }
};

/// Logistic link, stable over the whole real line.
double sigmoid(double z);
/// Derivative of the logistic link.
double sigmoid_derivative(double z);
/// log(sigmoid(z)) without overflow or cancellation.
double log_sigmoid(double z);

/// Synthetic dueling environment with a hidden unit-norm parameter.
class Environment {
public:
    Environment(RewardKind kind, int dim, int num_arms, std::uint64_t seed);

    RewardKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int num_arms() const { return num_arms_; }
    std::uint64_t seed() const { return seed_; }
    const Vec& theta_star() const { return theta_star_; }

    /// K arms drawn uniformly from the unit ball; a pure function of (seed, t).
    ArmSet draw_arms(std::int64_t t) const;

    double reward(const Vec& x) const;

    /// Bernoulli(sigmoid(f(x1) - f(x2))) driven by one uniform from `rng`.
    int sample_preference(const Vec& x1, const Vec& x2, StreamRng& rng) const;

    /// 2 max_x f(x) - f(x_first) - f(x_second) over the given arm set.
    double instantaneous_regret(const ArmSet& arms, std::size_t first, std::size_t second) const;

    /// Index of the best arm (lowest index on ties).
    std::size_t best_arm(const ArmSet& arms) const;

private:
    RewardKind kind_;
    int dim_;
    int num_arms_;
    std::uint64_t seed_;
    Vec theta_star_;
};

/// Standard-normal vector normalised to the unit sphere.
Vec sample_unit_sphere(int dim, StreamRng& rng);

}  // namespace duelay

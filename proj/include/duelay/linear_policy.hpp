#pragma once

#include "duelay/linear_mle.hpp"
#include "duelay/policy.hpp"

#include <vector>

namespace duelay {

/// mu'(bound): the smallest link slope over scores in [-bound, bound].
double default_kappa_mu(double theta_bound = 1.0, double feature_bound = 2.0);

struct LinearPolicyConfig {
    double lambda = 0.5;
    double kappa_mu = default_kappa_mu();
    double delta = 0.1;
    double feature_bound = 2.0;  // L, bound on ||phi(x1) - phi(x2)||
    int threshold = 1;           // M
    double rho = 1.0;
    Variant variant = Variant::kIpw;
    double beta_scale = 1.0;
    double grad_tol = 1e-8;
    int max_newton_iters = 100;

    /// Throws std::invalid_argument; requires lambda > kappa_mu * L^2.
    void validate() const;
    MleConfig mle() const;
};

/// sqrt(2 log(1/delta) + d log(1 + t L^2 kappa / (d lambda))) + M L + sqrt(lambda kappa),
/// times beta_scale.
double beta_t(const LinearPolicyConfig& cfg, std::int64_t t, int dim);

/// Linear dueling bandit with delayed feedback: greedy first arm, UCB second
/// arm with bonus beta_t / (rho kappa) ||phi(x) - phi(x1)||_{V^{-1}}.
class LinearPolicy : public DuelingPolicy {
public:
    LinearPolicy(int dim, LinearPolicyConfig cfg);

    ArmPair step(const ArmSet& arms, const Environment& env, const DelayModel& delay,
                 std::uint64_t seed) override;

    std::size_t select_first_arm(const ArmSet& arms) const;
    std::size_t select_second_arm(const ArmSet& arms, std::size_t first) const;
    /// Coefficient multiplying ||phi(x) - phi(x1)||_{V^{-1}} in round t.
    double bonus_scale(std::int64_t t) const;

    /// Rebuild the training rows for the current round from the history.
    ObservedDataset materialize_dataset() const;

    const LinearPolicyConfig& config() const { return cfg_; }
    const Vec& theta() const { return theta_; }
    const InfoMatrix& info_matrix() const { return info_; }
    const ObservedDataset& dataset() const { return dataset_; }
    /// Next round to be played (1-based).
    std::int64_t round() const { return t_; }
    /// sum_t ||dphi_t||^2_{V_{t-1}^{-1}} over the rounds played so far.
    double information_gain() const { return info_gain_; }
    double max_information_summand() const { return max_info_summand_; }
    std::size_t pending() const { return pending_.size(); }

private:
    struct Played {
        Vec delta_phi;
        std::int64_t round = 0;
        int preference = 0;
        int delay = 0;
        bool delivered = false;
    };

    int dim_;
    LinearPolicyConfig cfg_;
    std::int64_t t_ = 1;
    Vec theta_;
    InfoMatrix info_;
    ObservedDataset dataset_;
    PendingQueue pending_;
    std::vector<Played> history_;
    double info_gain_ = 0.0;
    double max_info_summand_ = 0.0;
};

}  // namespace duelay

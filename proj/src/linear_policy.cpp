#include "duelay/linear_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace duelay {

double default_kappa_mu(double theta_bound, double feature_bound) {
    return sigmoid_derivative(theta_bound * feature_bound);
}

void LinearPolicyConfig::validate() const {
    if (!(kappa_mu > 0.0 && kappa_mu <= 0.25)) throw std::invalid_argument("kappa_mu must lie in (0, 1/4]");
    if (!(feature_bound > 0.0)) throw std::invalid_argument("feature bound L must be positive");
    if (!(lambda > kappa_mu * feature_bound * feature_bound)) {
        throw std::invalid_argument("lambda = " + std::to_string(lambda) + " must exceed kappa_mu * L^2 = " +
                                    std::to_string(kappa_mu * feature_bound * feature_bound));
    }
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (threshold < 1) throw std::invalid_argument("delay threshold M must be >= 1");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
    if (!(beta_scale >= 0.0)) throw std::invalid_argument("beta_scale must be non-negative");
}

MleConfig LinearPolicyConfig::mle() const {
    MleConfig m;
    m.lambda = lambda;
    m.kappa_mu = kappa_mu;
    m.grad_tol = grad_tol;
    m.max_iters = max_newton_iters;
    return m;
}

double beta_t(const LinearPolicyConfig& cfg, std::int64_t t, int dim) {
    const double d = dim;
    const double l2 = cfg.feature_bound * cfg.feature_bound;
    const double noise = std::sqrt(2.0 * std::log(1.0 / cfg.delta) +
                                   d * std::log1p(static_cast<double>(t) * l2 * cfg.kappa_mu / (d * cfg.lambda)));
    return cfg.beta_scale * (noise + cfg.threshold * cfg.feature_bound + std::sqrt(cfg.lambda * cfg.kappa_mu));
}

LinearPolicy::LinearPolicy(int dim, LinearPolicyConfig cfg)
    : dim_(dim), cfg_(cfg), theta_(Vec::Zero(dim)), info_(dim, cfg.lambda / cfg.kappa_mu), dataset_(dim) {
    cfg_.validate();
}

double LinearPolicy::bonus_scale(std::int64_t t) const {
    return beta_t(cfg_, t, dim_) / (cfg_.rho * cfg_.kappa_mu);
}

std::size_t LinearPolicy::select_first_arm(const ArmSet& arms) const {
    if (arms.size() == 0) throw std::invalid_argument("select_first_arm: empty arm set");
    return argmax_lowest(arms.arms.transpose() * theta_);
}

std::size_t LinearPolicy::select_second_arm(const ArmSet& arms, std::size_t first) const {
    if (first >= arms.size()) throw std::invalid_argument("select_second_arm: first arm not in the arm set");
    const Mat diffs = arms.arms.colwise() - arms.arms.col(static_cast<Eigen::Index>(first));
    const Vec exploit = diffs.transpose() * theta_;
    const Vec width = info_.inverse_quadratic_columns(diffs).cwiseSqrt();
    return argmax_lowest(exploit + bonus_scale(t_) * width);
}

ObservedDataset LinearPolicy::materialize_dataset() const {
    ObservedDataset data(dim_);
    Eigen::Index rows = 0;
    for (const auto& h : history_) {
        if (cfg_.variant != Variant::kIgnore || h.delivered) ++rows;
    }
    data.features.resize(rows, dim_);
    data.labels.resize(rows);
    Eigen::Index r = 0;
    for (const auto& h : history_) {
        double label = 0.0;
        switch (cfg_.variant) {
            case Variant::kIpw:
                label = h.delivered ? h.preference * ipw_weight(h.round, t_, h.delay, cfg_.threshold, cfg_.rho)
                                    : 0.0;
                break;
            case Variant::kIgnore:
                if (!h.delivered) continue;
                label = h.preference;
                break;
            case Variant::kHeuristic:
                label = h.delivered ? h.preference : sigmoid(theta_.dot(h.delta_phi));
                break;
        }
        data.features.row(r) = h.delta_phi.transpose();
        data.labels[r] = label;
        ++r;
    }
    return data;
}

ArmPair LinearPolicy::step(const ArmSet& arms, const Environment& env, const DelayModel& delay,
                           std::uint64_t seed) {
    if (arms.round != t_) {
        throw std::invalid_argument("LinearPolicy::step: expected round " + std::to_string(t_) + ", got " +
                                    std::to_string(arms.round));
    }
    if (arms.arms.rows() != dim_) throw std::invalid_argument("LinearPolicy::step: arm dimension mismatch");

    for (const auto& rec : pending_.poll(t_, cfg_.threshold)) {
        auto& h = history_[static_cast<std::size_t>(rec.round - 1)];
        h.delivered = true;
        h.preference = rec.preference;
        h.delay = rec.delay;
    }

    dataset_ = materialize_dataset();
    theta_ = solve_mle(dataset_, cfg_.mle(), theta_).theta;

    const std::size_t first = select_first_arm(arms);
    const std::size_t second = select_second_arm(arms, first);

    Played played;
    played.delta_phi = arms.arm(first) - arms.arm(second);
    played.round = t_;
    const double summand = info_.inverse_quadratic(played.delta_phi);
    info_gain_ += summand;
    max_info_summand_ = std::max(max_info_summand_, summand);
    info_.rank_one_update(played.delta_phi, 1.0);

    pending_.push(play_duel(arms, {first, second}, env, delay, seed));
    history_.push_back(std::move(played));
    ++t_;
    return {first, second};
}

}  // namespace duelay

#pragma once

#include "duelay/linalg.hpp"
#include "duelay/neural_model.hpp"
#include "duelay/policy.hpp"

#include <vector>

namespace duelay {

/// Training stops once repeated halving takes the step below this fraction
/// of the configured learning rate.
inline constexpr double kMinLearningRateFraction = 1e-6;

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 200;
    double grad_tol = 1e-4;
};

struct NeuralPolicyConfig {
    double lambda = 1.0;
    double kappa_mu = 0.0;  // 0 selects default_kappa_mu()
    double delta = 0.1;
    int threshold = 1;  // M
    double rho = 1.0;
    double norm_bound = 1.0;  // B
    int width = 64;           // m
    int depth = 2;            // L
    TrainConfig train;
    Variant variant = Variant::kIpw;
    double nu_scale = 1.0;

    void validate() const;
    double kappa() const;
};

/// Training rows: column s of `first`/`second` is the padded pair of row s.
struct NeuralDataset {
    Mat first;
    Mat second;
    Vec labels;

    Eigen::Index size() const { return labels.size(); }
};

struct TrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    double grad_norm = 0.0;
    int epochs = 0;
    int rejected_steps = 0;
    bool converged = false;
};

/// -sum_s [p_s log mu(dh_s) + (1 - p_s) log mu(-dh_s)] + (m lambda / 2) ||theta - theta0||^2.
///
/// The m-scaled ridge is the form under which L(theta0) = n log 2 bounds the
/// drift ||theta_t - theta0|| <= sqrt(2 n log 2 / (m lambda)).
double neural_loss(const Mlp& net, const Vec& theta0, const NeuralDataset& data, double lambda, Vec* grad = nullptr);

/// Full-batch gradient descent on neural_loss from the current parameters:
/// a step that raises the loss is rejected and the learning rate halved.
TrainReport train_network(Mlp& net, const Vec& theta0, const NeuralDataset& data, double lambda,
                          const TrainConfig& cfg);

/// Neural dueling bandit with delayed feedback: greedy first arm on h(x; theta_t),
/// second arm maximising h(x; theta_t) + nu sigma(x, x1) with NTK features at theta0.
class NeuralPolicy : public DuelingPolicy {
public:
    /// `raw_dim` is the environment dimension; the network sees 2 * raw_dim inputs.
    NeuralPolicy(int raw_dim, NeuralPolicyConfig cfg, std::uint64_t seed);

    ArmPair step(const ArmSet& arms, const Environment& env, const DelayModel& delay,
                 std::uint64_t seed) override;

    /// g(x1; theta0) - g(x2; theta0) for padded contexts.
    Vec ntk_feature(const Vec& x1, const Vec& x2) const;
    /// sqrt(lambda / kappa) || (g(x; theta0) - g(x'; theta0)) / sqrt(m) ||_{V^{-1}}.
    double sigma(const Vec& x, const Vec& x_prime) const;
    /// Exploration multiplier for the current V (d_eff proxy = logdet V - logdet V0).
    double nu() const;
    /// Indices of (first, second) for the given arms without changing state.
    ArmPair select_pair(const ArmSet& arms) const;
    /// Pads every arm (columns of the result are padded contexts).
    Mat padded(const ArmSet& arms) const;

    NeuralDataset materialize_dataset() const;
    /// Materialise this round's rows and run train_network.
    TrainReport train();

    const NeuralPolicyConfig& config() const { return cfg_; }
    const Mlp& network() const { return net_; }
    const Vec& initial_params() const { return theta0_; }
    const LowRankInfoMatrix& info_matrix() const { return info_; }
    const NeuralDataset& dataset() const { return dataset_; }
    const TrainReport& last_report() const { return report_; }
    std::int64_t round() const { return t_; }
    double drift() const { return (net_.params() - theta0_).norm(); }

private:
    struct Played {
        Vec first;
        Vec second;
        std::int64_t round = 0;
        int preference = 0;
        int delay = 0;
        bool delivered = false;
    };

    int raw_dim_;
    NeuralPolicyConfig cfg_;
    double kappa_;
    Mlp net_;
    Mlp net0_;
    Vec theta0_;
    LowRankInfoMatrix info_;
    NeuralDataset dataset_;
    TrainReport report_;
    PendingQueue pending_;
    std::vector<Played> history_;
    std::int64_t t_ = 1;
};

}  // namespace duelay

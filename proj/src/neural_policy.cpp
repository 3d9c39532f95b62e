#include "duelay/neural_policy.hpp"

#include "duelay/linear_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace duelay {

void NeuralPolicyConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("neural lambda must be positive");
    const double k = kappa();
    if (!(k > 0.0 && k <= 0.25)) throw std::invalid_argument("kappa_mu must lie in (0, 1/4]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (threshold < 1) throw std::invalid_argument("delay threshold M must be >= 1");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
    if (!(norm_bound >= 0.0)) throw std::invalid_argument("norm bound B must be non-negative");
    if (width < 2 || width % 2 != 0) throw std::invalid_argument("network width must be even and >= 2");
    if (depth < 2) throw std::invalid_argument("network depth must be >= 2");
    if (!(train.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (train.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
    if (!(nu_scale >= 0.0)) throw std::invalid_argument("nu_scale must be non-negative");
}

double NeuralPolicyConfig::kappa() const { return kappa_mu > 0.0 ? kappa_mu : default_kappa_mu(); }

namespace {

// Both duel columns side by side; padded contexts keep only their top half
// so the folded forward pass applies.
struct LossInputs {
    Mat inputs;
    bool folded = false;
};

LossInputs prepare_inputs(const Mlp& net, const NeuralDataset& data) {
    if (data.first.rows() != net.input_dim() || data.second.rows() != net.input_dim() ||
        data.first.cols() != data.size() || data.second.cols() != data.size()) {
        throw std::invalid_argument("neural dataset shape does not match the network");
    }
    const Eigen::Index d = net.input_dim();
    const Eigen::Index n = data.size();
    LossInputs li;
    const Eigen::Index h = d / 2;
    li.folded = d % 2 == 0 && data.first.topRows(h) == data.first.bottomRows(h) &&
                data.second.topRows(h) == data.second.bottomRows(h);
    if (li.folded) {
        li.inputs.resize(h, 2 * n);
        li.inputs << data.first.topRows(h), data.second.topRows(h);
    } else {
        li.inputs.resize(d, 2 * n);
        li.inputs << data.first, data.second;
    }
    return li;
}

// Forward pass and loss; keeps what the backward pass needs.
struct Evaluation {
    double loss = 0.0;
    Mlp::Activations cache;
    Vec upstream;
};

Evaluation evaluate(const Mlp& net, const Vec& theta0, const LossInputs& li, const Vec& labels, double lambda) {
    Evaluation ev;
    ev.loss = 0.5 * net.width() * lambda * (net.params() - theta0).squaredNorm();
    const Eigen::Index n = labels.size();
    if (n == 0) return ev;
    const Vec out =
        li.folded ? net.forward_batch_folded(li.inputs, ev.cache) : net.forward_batch(li.inputs, ev.cache);
    ev.upstream.resize(2 * n);
    for (Eigen::Index s = 0; s < n; ++s) {
        const double dh = out[s] - out[n + s];
        const double p = labels[s];
        ev.loss -= p * log_sigmoid(dh) + (1.0 - p) * log_sigmoid(-dh);
        const double c = sigmoid(dh) - p;
        ev.upstream[s] = c;
        ev.upstream[n + s] = -c;
    }
    return ev;
}

Vec gradient_of(const Mlp& net, const Vec& theta0, const LossInputs& li, const Evaluation& ev, double lambda) {
    Vec grad = net.width() * lambda * (net.params() - theta0);
    if (ev.upstream.size() > 0) grad.noalias() += net.backward(li.inputs, ev.cache, ev.upstream);
    return grad;
}

}  // namespace

double neural_loss(const Mlp& net, const Vec& theta0, const NeuralDataset& data, double lambda, Vec* grad) {
    const LossInputs li = prepare_inputs(net, data);
    const Evaluation ev = evaluate(net, theta0, li, data.labels, lambda);
    if (grad) *grad = gradient_of(net, theta0, li, ev, lambda);
    return ev.loss;
}

TrainReport train_network(Mlp& net, const Vec& theta0, const NeuralDataset& data, double lambda,
                          const TrainConfig& cfg) {
    TrainReport rep;
    const LossInputs li = prepare_inputs(net, data);
    const Evaluation start = evaluate(net, theta0, li, data.labels, lambda);
    double loss = start.loss;
    Vec grad = gradient_of(net, theta0, li, start, lambda);
    rep.initial_loss = loss;
    double lr = cfg.learning_rate;
    Vec current = net.params();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rep.grad_norm = grad.norm();
        if (rep.grad_norm < cfg.grad_tol) {
            rep.converged = true;
            break;
        }
        net.params() = current - lr * grad;
        const Evaluation cand = evaluate(net, theta0, li, data.labels, lambda);
        ++rep.epochs;
        if (cand.loss <= loss) {
            current = net.params();
            loss = cand.loss;
            grad = gradient_of(net, theta0, li, cand, lambda);
        } else {
            net.params() = current;
            lr *= 0.5;
            ++rep.rejected_steps;
            if (lr < kMinLearningRateFraction * cfg.learning_rate) break;
        }
    }
    net.params() = current;
    rep.grad_norm = grad.norm();
    rep.converged = rep.converged || rep.grad_norm < cfg.grad_tol;
    rep.final_loss = loss;
    return rep;
}

namespace {

Mlp make_initial(int raw_dim, const NeuralPolicyConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    StreamRng rng = make_stream(seed, "init");
    return Mlp::init_symmetric(2 * raw_dim, cfg.width, cfg.depth, rng);
}

}  // namespace

NeuralPolicy::NeuralPolicy(int raw_dim, NeuralPolicyConfig cfg, std::uint64_t seed)
    : raw_dim_(raw_dim),
      cfg_(cfg),
      kappa_(cfg.kappa()),
      net_(make_initial(raw_dim, cfg, seed)),
      net0_(net_),
      theta0_(net_.params()),
      info_(net_.num_params(), cfg.lambda / cfg.kappa()) {
    dataset_.first.resize(2 * raw_dim, 0);
    dataset_.second.resize(2 * raw_dim, 0);
}

Vec NeuralPolicy::ntk_feature(const Vec& x1, const Vec& x2) const {
    return net0_.gradient(x1) - net0_.gradient(x2);
}

double NeuralPolicy::sigma(const Vec& x, const Vec& x_prime) const {
    const Vec g = ntk_feature(x, x_prime);
    return std::sqrt(cfg_.lambda / kappa_) * std::sqrt(info_.inverse_quadratic(g) / cfg_.width);
}

double NeuralPolicy::nu() const {
    const double d_eff = std::max(0.0, info_.logdet() - info_.logdet0());
    const double beta = std::sqrt(d_eff + 2.0 * std::log(1.0 / cfg_.delta)) / kappa_;
    const double radius = beta / cfg_.rho + cfg_.norm_bound * std::sqrt(cfg_.lambda / kappa_) + 1.0 +
                          cfg_.threshold / (kappa_ * cfg_.width * cfg_.rho);
    return cfg_.nu_scale * radius * kappa_ / cfg_.lambda;
}

Mat NeuralPolicy::padded(const ArmSet& arms) const {
    if (arms.arms.rows() != raw_dim_) throw std::invalid_argument("NeuralPolicy: arm dimension mismatch");
    Mat out(2 * raw_dim_, arms.arms.cols());
    for (Eigen::Index k = 0; k < arms.arms.cols(); ++k) out.col(k) = pad_context(arms.arms.col(k));
    return out;
}

ArmPair NeuralPolicy::select_pair(const ArmSet& arms) const {
    if (arms.size() == 0) throw std::invalid_argument("NeuralPolicy::select_pair: empty arm set");
    const Mat ctx = padded(arms);
    const Vec h = net_.forward_batch(ctx);
    const std::size_t first = argmax_lowest(h);
    const Mat g0 = net0_.gradients(ctx);
    const Mat diffs = g0.colwise() - g0.col(static_cast<Eigen::Index>(first));
    const Vec q = info_.inverse_quadratic_columns(diffs);
    const Vec sig = (std::sqrt(cfg_.lambda / kappa_) * (q / cfg_.width).cwiseSqrt().array()).matrix();
    return {first, argmax_lowest(h + nu() * sig)};
}

NeuralDataset NeuralPolicy::materialize_dataset() const {
    Eigen::Index rows = 0;
    for (const auto& h : history_) {
        if (cfg_.variant != Variant::kIgnore || h.delivered) ++rows;
    }
    NeuralDataset data;
    data.first.resize(2 * raw_dim_, rows);
    data.second.resize(2 * raw_dim_, rows);
    data.labels.resize(rows);
    Eigen::Index r = 0;
    for (const auto& h : history_) {
        double label = 0.0;
        switch (cfg_.variant) {
            case Variant::kIpw:
                // Usable from the round after arrival: 1{D <= min(M, t - s - 1)}.
                label = h.delivered ? h.preference * ipw_weight(h.round, t_ - 1, h.delay, cfg_.threshold, cfg_.rho)
                                    : 0.0;
                break;
            case Variant::kIgnore:
                if (!h.delivered) continue;
                label = h.preference;
                break;
            case Variant::kHeuristic:
                label = h.delivered ? h.preference : sigmoid(net_.forward(h.first) - net_.forward(h.second));
                break;
        }
        data.first.col(r) = h.first;
        data.second.col(r) = h.second;
        data.labels[r] = label;
        ++r;
    }
    return data;
}

TrainReport NeuralPolicy::train() {
    dataset_ = materialize_dataset();
    report_ = train_network(net_, theta0_, dataset_, cfg_.lambda, cfg_.train);
    return report_;
}

ArmPair NeuralPolicy::step(const ArmSet& arms, const Environment& env, const DelayModel& delay,
                           std::uint64_t seed) {
    if (arms.round != t_) {
        throw std::invalid_argument("NeuralPolicy::step: expected round " + std::to_string(t_) + ", got " +
                                    std::to_string(arms.round));
    }
    if (t_ >= 2) {
        for (const auto& rec : pending_.poll(t_ - 1, cfg_.threshold)) {
            auto& h = history_[static_cast<std::size_t>(rec.round - 1)];
            h.delivered = true;
            h.preference = rec.preference;
            h.delay = rec.delay;
        }
    }
    train();

    const ArmPair pair = select_pair(arms);
    Played played;
    played.first = pad_context(arms.arm(pair.first));
    played.second = pad_context(arms.arm(pair.second));
    played.round = t_;
    info_.rank_one_update(ntk_feature(played.first, played.second), 1.0 / cfg_.width);

    pending_.push(play_duel(arms, pair, env, delay, seed));
    history_.push_back(std::move(played));
    ++t_;
    return pair;
}

}  // namespace duelay

#include "duelay/linear_mle.hpp"

#include "duelay/environment.hpp"

#include <cmath>
#include <sstream>

namespace duelay {

void ObservedDataset::reserve_rows(Eigen::Index n) {
    if (n > features.rows()) {
        features.conservativeResize(n, Eigen::NoChange);
        labels.conservativeResize(n);
    }
}

void ObservedDataset::add(const Vec& delta_phi, double label) {
    if (features.cols() == 0 && features.rows() == 0) features.resize(0, delta_phi.size());
    if (delta_phi.size() != features.cols()) {
        throw std::invalid_argument("ObservedDataset::add: dimension mismatch");
    }
    const Eigen::Index n = labels.size();
    features.conservativeResize(n + 1, Eigen::NoChange);
    labels.conservativeResize(n + 1);
    features.row(n) = delta_phi.transpose();
    labels[n] = label;
}

void MleConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("MleConfig: lambda must be positive");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("MleConfig: grad_tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("MleConfig: max_iters must be >= 1");
}

namespace {

void check_dims(const Vec& theta, const ObservedDataset& data) {
    if (data.size() > 0 && data.dim() != theta.size()) {
        throw std::invalid_argument("linear_mle: parameter and feature dimensions differ");
    }
}

}  // namespace

double ipw_loss(const Vec& theta, const ObservedDataset& data, const MleConfig& cfg) {
    check_dims(theta, data);
    double loss = 0.5 * cfg.lambda * theta.squaredNorm();
    if (data.size() == 0) return loss;
    const Vec z = data.features * theta;
    for (Eigen::Index s = 0; s < z.size(); ++s) {
        const double p = data.labels[s];
        loss -= p * log_sigmoid(z[s]) + (1.0 - p) * log_sigmoid(-z[s]);
    }
    return loss;
}

Vec ipw_grad(const Vec& theta, const ObservedDataset& data, const MleConfig& cfg) {
    check_dims(theta, data);
    Vec g = cfg.lambda * theta;
    if (data.size() == 0) return g;
    Vec r = data.features * theta;
    for (Eigen::Index s = 0; s < r.size(); ++s) r[s] = sigmoid(r[s]) - data.labels[s];
    g.noalias() += data.features.transpose() * r;
    return g;
}

Mat ipw_hessian(const Vec& theta, const ObservedDataset& data, const MleConfig& cfg) {
    check_dims(theta, data);
    const Eigen::Index d = theta.size();
    Mat h = cfg.lambda * Mat::Identity(d, d);
    if (data.size() == 0) return h;
    Vec w = data.features * theta;
    for (Eigen::Index s = 0; s < w.size(); ++s) w[s] = sigmoid_derivative(w[s]);
    h.noalias() += data.features.transpose() * w.asDiagonal() * data.features;
    return h;
}

MleResult solve_mle(const ObservedDataset& data, const MleConfig& cfg, const Vec& warm_start) {
    cfg.validate();
    check_dims(warm_start, data);
    MleResult out;
    out.theta = warm_start;
    if (!all_finite(out.theta)) out.theta.setZero();

    double loss = ipw_loss(out.theta, data, cfg);
    Vec g = ipw_grad(out.theta, data, cfg);
    out.grad_norm = g.norm();

    constexpr double kArmijo = 1e-4;
    for (int it = 0; it < cfg.max_iters; ++it) {
        if (out.grad_norm < cfg.grad_tol) {
            out.iterations = it;
            return out;
        }
        const Mat h = ipw_hessian(out.theta, data, cfg);
        const Vec step = -h.llt().solve(g);
        const double slope = g.dot(step);

        double t = 1.0;
        Vec candidate;
        double cand_loss = 0.0;
        Vec cand_grad;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            candidate = out.theta + t * step;
            cand_loss = ipw_loss(candidate, data, cfg);
            if (cand_loss <= loss + kArmijo * t * slope) {
                accepted = true;
                break;
            }
            // Near the optimum loss differences sink below round-off; fall
            // back on gradient decrease.
            cand_grad = ipw_grad(candidate, data, cfg);
            if (cand_grad.norm() < out.grad_norm && cand_loss <= loss + 1e-12 * (1.0 + std::abs(loss))) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        out.theta = candidate;
        loss = cand_loss;
        g = ipw_grad(out.theta, data, cfg);
        out.grad_norm = g.norm();
        out.iterations = it + 1;
    }
    if (out.grad_norm < cfg.grad_tol) return out;
    std::ostringstream msg;
    msg << "solve_mle: no convergence after " << out.iterations << " Newton iterations (gradient norm "
        << out.grad_norm << ", tolerance " << cfg.grad_tol << ")";
    throw ConvergenceError(msg.str(), out.grad_norm);
}

}  // namespace duelay

#pragma once

#include "duelay/linalg.hpp"

#include <stdexcept>
#include <string>

namespace duelay {

/// Rows (delta_phi_s, p_s) of the weighted logistic loss. For the IPW
/// estimator p_s = omega_{s,t} y_s is 0 or 1/rho; baselines store 0/1 labels
/// or soft imputed probabilities.
struct ObservedDataset {
    Mat features;  // n x d, one feature difference per row
    Vec labels;    // n

    ObservedDataset() = default;
    explicit ObservedDataset(Eigen::Index dim) : features(0, dim), labels(0) {}

    Eigen::Index size() const { return labels.size(); }
    Eigen::Index dim() const { return features.cols(); }
    void reserve_rows(Eigen::Index n);
    void add(const Vec& delta_phi, double label);
};

struct MleConfig {
    double lambda = 0.5;
    double grad_tol = 1e-8;
    int max_iters = 100;
    double kappa_mu = 0.0;  // informational here; the policy checks lambda against it

    void validate() const;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double grad_norm)
        : std::runtime_error(what), grad_norm_(grad_norm) {}
    double grad_norm() const { return grad_norm_; }

private:
    double grad_norm_;
};

/// -sum_s [p_s log mu(theta^T dphi_s) + (1 - p_s) log mu(-theta^T dphi_s)] + lambda/2 ||theta||^2
double ipw_loss(const Vec& theta, const ObservedDataset& data, const MleConfig& cfg);

/// sum_s (mu(theta^T dphi_s) - p_s) dphi_s + lambda theta
Vec ipw_grad(const Vec& theta, const ObservedDataset& data, const MleConfig& cfg);

/// sum_s mu'(theta^T dphi_s) dphi_s dphi_s^T + lambda I; independent of the labels.
Mat ipw_hessian(const Vec& theta, const ObservedDataset& data, const MleConfig& cfg);

struct MleResult {
    Vec theta;
    double grad_norm = 0.0;
    int iterations = 0;
};

/// Damped Newton (Cholesky step, Armijo backtracking) from `warm_start`.
/// Throws ConvergenceError when max_iters pass without ||grad|| < grad_tol.
MleResult solve_mle(const ObservedDataset& data, const MleConfig& cfg, const Vec& warm_start);

}  // namespace duelay

#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace duelay {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// True when every entry is finite.
bool all_finite(const Vec& v);

/// Regularised design matrix V = ridge * I + sum_i scale_i v_i v_i^T with a
/// maintained inverse and log-determinant.
///
/// The inverse is kept current with the rank-one (Sherman-Morrison) identity
/// and rebuilt from a Cholesky factorisation every `kRefreshInterval`
/// updates, which bounds the accumulated floating-point drift.
class InfoMatrix {
public:
    static constexpr std::int64_t kRefreshInterval = 500;

    InfoMatrix(Eigen::Index dim, double ridge);

    /// mat += scale * v v^T. Throws std::invalid_argument on a dimension
    /// mismatch, negative scale or non-finite input.
    void rank_one_update(const Vec& v, double scale = 1.0);

    /// sqrt(v^T M v) with M = mat, or M = inv when `use_inverse` is set.
    double weighted_norm(const Vec& v, bool use_inverse) const;

    /// Squared inverse norm v^T inv v, clamped at zero.
    double inverse_quadratic(const Vec& v) const;

    /// Column-wise squared inverse norms of `cols` (dim x n), computed with
    /// one matrix product.
    Vec inverse_quadratic_columns(const Mat& cols) const;

    /// Recompute inv and logdet from scratch via Cholesky.
    void refresh();

    /// ||inv * mat - I||_F.
    double inverse_residual() const;

    Eigen::Index dim() const { return mat_.rows(); }
    double ridge() const { return ridge_; }
    const Mat& matrix() const { return mat_; }
    const Mat& inverse() const { return inv_; }
    double logdet() const { return logdet_; }
    double logdet0() const { return logdet0_; }
    std::int64_t updates() const { return updates_; }

private:
    double ridge_;
    Mat mat_;
    Mat inv_;
    double logdet_;
    double logdet0_;
    std::int64_t updates_ = 0;
    Vec scratch_;
};

/// The same V = ridge * I + sum_i scale_i v_i v_i^T for dim much larger than
/// the number of updates. Keeps the scaled vectors F and the Cholesky factor
/// of the small Gram matrix ridge * I + F^T F, so quadratic forms use
/// v^T V^{-1} v = (|v|^2 - |L^{-1} F^T v|^2) / ridge and cost O(dim * rank).
class LowRankInfoMatrix {
public:
    LowRankInfoMatrix(Eigen::Index dim, double ridge);

    void rank_one_update(const Vec& v, double scale = 1.0);
    double weighted_norm(const Vec& v, bool use_inverse) const;
    double inverse_quadratic(const Vec& v) const;
    Vec inverse_quadratic_columns(const Mat& cols) const;

    /// Dense V and V^{-1}; O(dim^2 * rank), meant for checks.
    Mat matrix() const;
    Mat inverse() const;

    Eigen::Index dim() const { return dim_; }
    Eigen::Index rank() const { return rank_; }
    double ridge() const { return ridge_; }
    double logdet() const { return logdet_; }
    double logdet0() const { return logdet0_; }
    std::int64_t updates() const { return updates_; }

private:
    Mat project(const Mat& cols) const;  // L^{-1} F^T cols

    Eigen::Index dim_;
    double ridge_;
    Mat factors_;  // dim x capacity, first rank_ columns used
    Mat chol_;     // capacity x capacity, lower triangle of the leading rank_ block
    Eigen::Index rank_ = 0;
    double logdet_;
    double logdet0_;
    std::int64_t updates_ = 0;
};

}  // namespace duelay

#include "duelay/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace duelay {

bool all_finite(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) return false;
    }
    return true;
}

InfoMatrix::InfoMatrix(Eigen::Index dim, double ridge) : ridge_(ridge) {
    if (dim <= 0) throw std::invalid_argument("InfoMatrix: dimension must be positive");
    if (!(ridge > 0.0) || !std::isfinite(ridge)) {
        throw std::invalid_argument("InfoMatrix: ridge must be positive and finite");
    }
    mat_ = Mat::Identity(dim, dim) * ridge;
    inv_ = Mat::Identity(dim, dim) / ridge;
    logdet_ = logdet0_ = static_cast<double>(dim) * std::log(ridge);
    scratch_.resize(dim);
}

void InfoMatrix::rank_one_update(const Vec& v, double scale) {
    if (v.size() != dim()) {
        throw std::invalid_argument("InfoMatrix::rank_one_update: expected length " +
                                    std::to_string(dim()) + ", got " + std::to_string(v.size()));
    }
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("InfoMatrix::rank_one_update: scale must be non-negative");
    }
    if (!all_finite(v)) throw std::invalid_argument("InfoMatrix::rank_one_update: non-finite vector");

    scratch_.noalias() = inv_ * v;
    const double denom = 1.0 + scale * v.dot(scratch_);
    if (denom <= 1e-12) {
        throw std::runtime_error("InfoMatrix::rank_one_update: update would break positive definiteness");
    }
    if (scale > 0.0) {
        mat_.noalias() += scale * v * v.transpose();
        inv_.noalias() -= (scale / denom) * scratch_ * scratch_.transpose();
        logdet_ += std::log(denom);
    }
    ++updates_;
    if (updates_ % kRefreshInterval == 0) refresh();
}

double InfoMatrix::weighted_norm(const Vec& v, bool use_inverse) const {
    if (v.size() != dim()) throw std::invalid_argument("InfoMatrix::weighted_norm: dimension mismatch");
    const Mat& m = use_inverse ? inv_ : mat_;
    const double q = v.dot(m * v);
    return q > 0.0 ? std::sqrt(q) : 0.0;
}

double InfoMatrix::inverse_quadratic(const Vec& v) const {
    if (v.size() != dim()) throw std::invalid_argument("InfoMatrix::inverse_quadratic: dimension mismatch");
    return std::max(0.0, v.dot(inv_ * v));
}

Vec InfoMatrix::inverse_quadratic_columns(const Mat& cols) const {
    if (cols.rows() != dim()) {
        throw std::invalid_argument("InfoMatrix::inverse_quadratic_columns: dimension mismatch");
    }
    const Mat w = inv_ * cols;
    Vec out = cols.cwiseProduct(w).colwise().sum().transpose();
    return out.cwiseMax(0.0);
}

void InfoMatrix::refresh() {
    Eigen::LLT<Mat> llt(mat_);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("InfoMatrix::refresh: matrix is not positive definite");
    }
    inv_ = llt.solve(Mat::Identity(dim(), dim()));
    inv_ = 0.5 * (inv_ + inv_.transpose());
    const Mat& l = llt.matrixLLT();
    double ld = 0.0;
    for (Eigen::Index i = 0; i < dim(); ++i) ld += std::log(l(i, i));
    logdet_ = 2.0 * ld;
}

double InfoMatrix::inverse_residual() const {
    return (inv_ * mat_ - Mat::Identity(dim(), dim())).norm();
}

LowRankInfoMatrix::LowRankInfoMatrix(Eigen::Index dim, double ridge) : dim_(dim), ridge_(ridge) {
    if (dim <= 0) throw std::invalid_argument("LowRankInfoMatrix: dimension must be positive");
    if (!(ridge > 0.0) || !std::isfinite(ridge)) {
        throw std::invalid_argument("LowRankInfoMatrix: ridge must be positive and finite");
    }
    logdet_ = logdet0_ = static_cast<double>(dim) * std::log(ridge);
}

void LowRankInfoMatrix::rank_one_update(const Vec& v, double scale) {
    if (v.size() != dim_) {
        throw std::invalid_argument("LowRankInfoMatrix::rank_one_update: expected length " + std::to_string(dim_) +
                                    ", got " + std::to_string(v.size()));
    }
    if (!(scale >= 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("LowRankInfoMatrix::rank_one_update: scale must be non-negative");
    }
    if (!all_finite(v)) throw std::invalid_argument("LowRankInfoMatrix::rank_one_update: non-finite vector");
    ++updates_;
    if (scale == 0.0 || v.squaredNorm() == 0.0) return;

    if (rank_ == factors_.cols()) {
        const Eigen::Index cap = std::max<Eigen::Index>(16, 2 * rank_);
        factors_.conservativeResize(dim_, cap);
        Mat grown = Mat::Zero(cap, cap);
        grown.topLeftCorner(rank_, rank_) = chol_.topLeftCorner(rank_, rank_);
        chol_ = std::move(grown);
    }
    const Vec f = std::sqrt(scale) * v;
    const auto lead = chol_.topLeftCorner(rank_, rank_).triangularView<Eigen::Lower>();
    Vec l = factors_.leftCols(rank_).transpose() * f;
    lead.solveInPlace(l);
    // Schur complement equals ridge * (1 + f^T V^{-1} f) >= ridge.
    const double pivot2 = ridge_ + f.squaredNorm() - l.squaredNorm();
    if (!(pivot2 > 0.0)) {
        throw std::runtime_error("LowRankInfoMatrix::rank_one_update: update would break positive definiteness");
    }
    factors_.col(rank_) = f;
    chol_.row(rank_).head(rank_) = l.transpose();
    chol_(rank_, rank_) = std::sqrt(pivot2);
    ++rank_;
    logdet_ += std::log(pivot2 / ridge_);
}

Mat LowRankInfoMatrix::project(const Mat& cols) const {
    Mat w = factors_.leftCols(rank_).transpose() * cols;
    chol_.topLeftCorner(rank_, rank_).triangularView<Eigen::Lower>().solveInPlace(w);
    return w;
}

double LowRankInfoMatrix::weighted_norm(const Vec& v, bool use_inverse) const {
    if (v.size() != dim_) throw std::invalid_argument("LowRankInfoMatrix::weighted_norm: dimension mismatch");
    if (use_inverse) return std::sqrt(inverse_quadratic(v));
    const double q = ridge_ * v.squaredNorm() + (factors_.leftCols(rank_).transpose() * v).squaredNorm();
    return std::sqrt(q);
}

double LowRankInfoMatrix::inverse_quadratic(const Vec& v) const {
    if (v.size() != dim_) throw std::invalid_argument("LowRankInfoMatrix::inverse_quadratic: dimension mismatch");
    return inverse_quadratic_columns(v)[0];
}

Vec LowRankInfoMatrix::inverse_quadratic_columns(const Mat& cols) const {
    if (cols.rows() != dim_) {
        throw std::invalid_argument("LowRankInfoMatrix::inverse_quadratic_columns: dimension mismatch");
    }
    Vec out = cols.colwise().squaredNorm().transpose();
    if (rank_ > 0) out -= project(cols).colwise().squaredNorm().transpose();
    return (out / ridge_).cwiseMax(0.0);
}

Mat LowRankInfoMatrix::matrix() const {
    Mat m = Mat::Identity(dim_, dim_) * ridge_;
    m.noalias() += factors_.leftCols(rank_) * factors_.leftCols(rank_).transpose();
    return m;
}

Mat LowRankInfoMatrix::inverse() const {
    Mat w = factors_.leftCols(rank_).transpose();
    chol_.topLeftCorner(rank_, rank_).triangularView<Eigen::Lower>().solveInPlace(w);
    Mat inv = Mat::Identity(dim_, dim_);
    inv.noalias() -= w.transpose() * w;
    return inv / ridge_;
}

}  // namespace duelay

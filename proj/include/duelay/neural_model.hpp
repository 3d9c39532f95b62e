#pragma once

#include "duelay/linalg.hpp"
#include "duelay/rng.hpp"

#include <vector>

namespace duelay {

/// (x, x) / sqrt(2) after normalising x to unit length. Throws
/// std::invalid_argument for a zero (or non-finite) vector.
Vec pad_context(const Vec& x);

/// True when both halves agree to `tol` and the norm is 1 to `tol`.
bool is_padded_context(const Vec& x, double tol = 1e-12);

/// Fully connected ReLU network h(x) = W_L relu(W_{L-1} relu(... relu(W_1 x))).
///
/// All weights live in one flat vector; layer l occupies a column-major
/// block of shape rows(l) x cols(l): W_1 is width x input, hidden layers are
/// width x width, W_L is 1 x width.
class Mlp {
public:
    /// Per-layer pre- and post-activations of a batch forward pass.
    struct Activations {
        std::vector<Mat> pre;
        std::vector<Mat> post;
        bool folded = false;
    };

    Mlp(int input_dim, int width, int depth);

    /// Mirrored initialisation: every non-output layer is block-diagonal
    /// [[W, 0], [0, W]] with W_ij ~ N(0, 4/m), the output layer is
    /// [w^T, -w^T] with w_j ~ N(0, 2/m). Yields h(x) = 0 on padded contexts.
    static Mlp init_symmetric(int input_dim, int width, int depth, StreamRng& rng);

    int input_dim() const { return input_dim_; }
    int width() const { return width_; }
    int depth() const { return depth_; }
    Eigen::Index num_params() const { return params_.size(); }

    const Vec& params() const { return params_; }
    Vec& params() { return params_; }
    void set_params(const Vec& p);

    int layer_rows(int l) const;
    int layer_cols(int l) const;
    Eigen::Map<const Mat> layer(int l) const;
    Eigen::Map<Mat> layer(int l);

    double forward(const Vec& x) const;
    /// Outputs for every column of `inputs` (input_dim x n).
    Vec forward_batch(const Mat& inputs) const;
    /// Same, keeping the activations for a later `backward`.
    Vec forward_batch(const Mat& inputs, Activations& cache) const;
    /// Forward pass on padded contexts (u, u) given only their halves u
    /// ((input_dim / 2) x n). The first layer acts as its two column halves
    /// summed, which halves the cost of the widest product.
    Vec forward_batch_folded(const Mat& halves, Activations& cache) const;
    /// sum_j upstream_j g(x_j) from activations of the same `inputs` (the
    /// halves when the cache came from `forward_batch_folded`).
    Vec backward(const Mat& inputs, const Activations& cache, const Vec& upstream) const;

    /// g(x) = dh/dtheta, ReLU'(0) taken as 0.
    Vec gradient(const Vec& x) const;
    /// One gradient per input column (num_params x n).
    Mat gradients(const Mat& inputs) const;

    /// sum_j upstream_j g(x_j) for the columns x_j of `inputs`; writes the
    /// network outputs to `outputs` when non-null.
    Vec weighted_gradient(const Mat& inputs, const Vec& upstream, Vec* outputs = nullptr) const;

private:
    void check_input(Eigen::Index rows) const;
    Vec finish_forward(Activations& cache) const;

    int input_dim_;
    int width_;
    int depth_;
    std::vector<Eigen::Index> offsets_;
    Vec params_;
};

}  // namespace duelay

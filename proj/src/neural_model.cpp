#include "duelay/neural_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace duelay {

Vec pad_context(const Vec& x) {
    const double n = x.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("pad_context: zero or non-finite context");
    Vec out(2 * x.size());
    const Vec unit = x / (n * std::sqrt(2.0));
    out << unit, unit;
    return out;
}

bool is_padded_context(const Vec& x, double tol) {
    if (x.size() % 2 != 0) return false;
    const Eigen::Index h = x.size() / 2;
    return (x.head(h) - x.tail(h)).cwiseAbs().maxCoeff() <= tol && std::abs(x.norm() - 1.0) <= tol;
}

Mlp::Mlp(int input_dim, int width, int depth) : input_dim_(input_dim), width_(width), depth_(depth) {
    if (input_dim < 1 || width < 1) throw std::invalid_argument("Mlp: input and width must be positive");
    if (depth < 2) throw std::invalid_argument("Mlp: depth must be >= 2");
    Eigen::Index total = 0;
    for (int l = 0; l < depth; ++l) {
        offsets_.push_back(total);
        total += static_cast<Eigen::Index>(layer_rows(l)) * layer_cols(l);
    }
    offsets_.push_back(total);
    params_ = Vec::Zero(total);
}

int Mlp::layer_rows(int l) const { return l == depth_ - 1 ? 1 : width_; }
int Mlp::layer_cols(int l) const { return l == 0 ? input_dim_ : width_; }

Eigen::Map<const Mat> Mlp::layer(int l) const {
    return Eigen::Map<const Mat>(params_.data() + offsets_[l], layer_rows(l), layer_cols(l));
}

Eigen::Map<Mat> Mlp::layer(int l) {
    return Eigen::Map<Mat>(params_.data() + offsets_[l], layer_rows(l), layer_cols(l));
}

void Mlp::set_params(const Vec& p) {
    if (p.size() != params_.size()) throw std::invalid_argument("Mlp::set_params: wrong parameter count");
    params_ = p;
}

Mlp Mlp::init_symmetric(int input_dim, int width, int depth, StreamRng& rng) {
    if (input_dim % 2 != 0 || width % 2 != 0) {
        throw std::invalid_argument("init_symmetric: input dimension and width must be even");
    }
    Mlp net(input_dim, width, depth);
    const int hw = width / 2;
    std::normal_distribution<double> hidden(0.0, std::sqrt(4.0 / width));
    std::normal_distribution<double> output(0.0, std::sqrt(2.0 / width));
    for (int l = 0; l < depth - 1; ++l) {
        auto w = net.layer(l);
        const int hc = net.layer_cols(l) / 2;
        Mat block(hw, hc);
        for (Eigen::Index j = 0; j < block.cols(); ++j)
            for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = hidden(rng);
        w.setZero();
        w.topLeftCorner(hw, hc) = block;
        w.bottomRightCorner(hw, hc) = block;
    }
    auto out = net.layer(depth - 1);
    for (int j = 0; j < hw; ++j) {
        const double v = output(rng);
        out(0, j) = v;
        out(0, j + hw) = -v;
    }
    return net;
}

void Mlp::check_input(Eigen::Index rows) const {
    if (rows != input_dim_) {
        throw std::invalid_argument("Mlp: expected input dimension " + std::to_string(input_dim_) + ", got " +
                                    std::to_string(rows));
    }
}

Vec Mlp::forward_batch(const Mat& inputs, Activations& cache) const {
    check_input(inputs.rows());
    cache.folded = false;
    cache.pre.resize(depth_);
    cache.post.resize(depth_);
    cache.pre[0].noalias() = layer(0) * inputs;
    return finish_forward(cache);
}

Vec Mlp::forward_batch_folded(const Mat& halves, Activations& cache) const {
    if (input_dim_ % 2 != 0 || 2 * halves.rows() != input_dim_) {
        throw std::invalid_argument("Mlp::forward_batch_folded: expected half-length inputs");
    }
    const Eigen::Index h = input_dim_ / 2;
    cache.folded = true;
    cache.pre.resize(depth_);
    cache.post.resize(depth_);
    cache.pre[0].noalias() = (layer(0).leftCols(h) + layer(0).rightCols(h)) * halves;
    return finish_forward(cache);
}

Vec Mlp::finish_forward(Activations& cache) const {
    auto& pre = cache.pre;
    auto& post = cache.post;
    for (int l = 0; l < depth_ - 1; ++l) {
        post[l] = pre[l].cwiseMax(0.0);
        pre[l + 1].noalias() = layer(l + 1) * post[l];
    }
    return pre[depth_ - 1].row(0).transpose();
}

double Mlp::forward(const Vec& x) const { return forward_batch(x)[0]; }

Vec Mlp::forward_batch(const Mat& inputs) const {
    Activations cache;
    return forward_batch(inputs, cache);
}

Vec Mlp::weighted_gradient(const Mat& inputs, const Vec& upstream, Vec* outputs) const {
    Activations cache;
    Vec out = forward_batch(inputs, cache);
    if (outputs) *outputs = std::move(out);
    return backward(inputs, cache, upstream);
}

Vec Mlp::backward(const Mat& inputs, const Activations& cache, const Vec& upstream) const {
    if (upstream.size() != inputs.cols()) throw std::invalid_argument("Mlp::backward: size mismatch");
    if (static_cast<int>(cache.pre.size()) != depth_) throw std::invalid_argument("Mlp::backward: stale activations");
    if (inputs.rows() != (cache.folded ? input_dim_ / 2 : input_dim_)) {
        throw std::invalid_argument("Mlp::backward: input dimension mismatch");
    }
    const auto& pre = cache.pre;
    const auto& post = cache.post;
    Vec grad(params_.size());
    Mat delta = upstream.transpose();  // 1 x n, d(sum)/d(pre-activation of the output)
    for (int l = depth_ - 1; l >= 0; --l) {
        Eigen::Map<Mat> block(grad.data() + offsets_[l], layer_rows(l), layer_cols(l));
        if (l == 0) {
            if (cache.folded) {
                const Eigen::Index h = input_dim_ / 2;
                block.leftCols(h).noalias() = delta * inputs.transpose();
                block.rightCols(h) = block.leftCols(h);
            } else {
                block.noalias() = delta * inputs.transpose();
            }
            break;
        }
        block.noalias() = delta * post[l - 1].transpose();
        Mat back = layer(l).transpose() * delta;
        delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return grad;
}

Vec Mlp::gradient(const Vec& x) const { return weighted_gradient(x, Vec::Ones(1)); }

Mat Mlp::gradients(const Mat& inputs) const {
    Activations cache;
    forward_batch(inputs, cache);
    const auto& pre = cache.pre;
    const auto& post = cache.post;
    const Eigen::Index n = inputs.cols();
    Mat out(params_.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vec delta = Vec::Ones(1);
        for (int l = depth_ - 1; l >= 0; --l) {
            const Vec below = l == 0 ? Vec(inputs.col(j)) : Vec(post[l - 1].col(j));
            Eigen::Map<Mat>(out.col(j).data() + offsets_[l], layer_rows(l), layer_cols(l)).noalias() =
                delta * below.transpose();
            if (l == 0) break;
            Vec back = layer(l).transpose() * delta;
            delta = back.cwiseProduct((pre[l - 1].col(j).array() > 0.0).cast<double>().matrix());
        }
    }
    return out;
}

}  // namespace duelay

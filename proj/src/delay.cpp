#include "duelay/delay.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace duelay {

std::string_view to_string(DelayModel::Kind kind) {
    switch (kind) {
        case DelayModel::Kind::kNone: return "none";
        case DelayModel::Kind::kGeometric: return "geometric";
        case DelayModel::Kind::kConstant: return "constant";
    }
    return "unknown";
}

double rho_of(DelayModel::Kind kind, double p, int constant, int threshold) {
    if (threshold < 1) throw std::invalid_argument("delay threshold M must be >= 1");
    double rho = 1.0;
    switch (kind) {
        case DelayModel::Kind::kNone: rho = 1.0; break;
        case DelayModel::Kind::kGeometric:
            if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric delay needs p in (0, 1]");
            rho = -std::expm1(threshold * std::log1p(-p));
            if (p == 1.0) rho = 1.0;
            break;
        case DelayModel::Kind::kConstant:
            if (constant < 1) throw std::invalid_argument("constant delay must be >= 1");
            rho = constant <= threshold ? 1.0 : 0.0;
            break;
    }
    if (!(rho > 0.0)) {
        throw std::invalid_argument("observation probability rho is 0: no feedback can ever arrive within M = " +
                                    std::to_string(threshold));
    }
    return rho;
}

DelayModel::DelayModel(Kind kind, double p, int constant, int threshold)
    : kind_(kind), p_(p), constant_(constant), threshold_(threshold), rho_(rho_of(kind, p, constant, threshold)) {}

DelayModel DelayModel::none(int threshold) { return DelayModel(Kind::kNone, 1.0, 1, threshold); }

DelayModel DelayModel::geometric(double p, int threshold) {
    return DelayModel(Kind::kGeometric, p, 1, threshold);
}

DelayModel DelayModel::constant(int c, int threshold) { return DelayModel(Kind::kConstant, 1.0, c, threshold); }

int DelayModel::sample(StreamRng& rng) const {
    switch (kind_) {
        case Kind::kNone: return 1;
        case Kind::kConstant: return constant_;
        case Kind::kGeometric: {
            if (p_ >= 1.0) return 1;
            std::geometric_distribution<int> failures(p_);
            return failures(rng) + 1;
        }
    }
    return 1;
}

double ipw_weight(std::int64_t s, std::int64_t t, int delay, int threshold, double rho) {
    const std::int64_t window = std::min<std::int64_t>(threshold, t - s);
    return delay <= window ? 1.0 / rho : 0.0;
}

void PendingQueue::push(DuelRecord record) {
    if (record.delay < 1) throw std::invalid_argument("PendingQueue::push: delay must be >= 1");
    record.delivered = false;
    records_.push_back(std::move(record));
}

std::vector<DuelRecord> PendingQueue::poll(std::int64_t t, int threshold) {
    std::vector<DuelRecord> arrived;
    std::deque<DuelRecord> keep;
    for (auto& r : records_) {
        if (r.delay > threshold) {
            if (t > r.round + threshold) {
                ++dropped_;
            } else {
                keep.push_back(std::move(r));
            }
        } else if (r.round + r.delay <= t) {
            r.delivered = true;
            arrived.push_back(std::move(r));
        } else {
            keep.push_back(std::move(r));
        }
    }
    records_ = std::move(keep);
    return arrived;
}

}  // namespace duelay

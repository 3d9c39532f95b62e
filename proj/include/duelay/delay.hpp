#pragma once

#include "duelay/linalg.hpp"
#include "duelay/rng.hpp"

#include <cstdint>
#include <deque>
#include <string_view>
#include <vector>

namespace duelay {

/// Censored delay model: feedback delayed by D >= 1 rounds and observed only
/// when D <= threshold. rho = P(D <= threshold) is computed in closed form.
class DelayModel {
public:
    enum class Kind { kNone, kGeometric, kConstant };

    /// Immediate feedback (D = 1, rho = 1).
    static DelayModel none(int threshold = 1);
    /// P(D = k) = p (1 - p)^(k - 1), k >= 1.
    static DelayModel geometric(double p, int threshold);
    /// D = c always; requires c <= threshold.
    static DelayModel constant(int c, int threshold);

    Kind kind() const { return kind_; }
    double success_prob() const { return p_; }
    int constant_delay() const { return constant_; }
    int threshold() const { return threshold_; }
    double rho() const { return rho_; }

    int sample(StreamRng& rng) const;

private:
    DelayModel(Kind kind, double p, int constant, int threshold);

    Kind kind_;
    double p_ = 1.0;
    int constant_ = 1;
    int threshold_;
    double rho_;
};

std::string_view to_string(DelayModel::Kind kind);

/// Closed-form P(D <= threshold); throws std::invalid_argument when it is 0.
double rho_of(DelayModel::Kind kind, double p, int constant, int threshold);

/// 1{D <= min(M, t - s)} / rho.
double ipw_weight(std::int64_t s, std::int64_t t, int delay, int threshold, double rho);

/// One played duel and its (possibly not yet visible) outcome.
struct DuelRecord {
    std::int64_t round = 0;
    Vec first;
    Vec second;
    int preference = 0;
    int delay = 1;
    bool delivered = false;
};

/// Undelivered duels, ordered by the round they were played in.
class PendingQueue {
public:
    void push(DuelRecord record);

    /// Remove and return every record with s + D <= t and D <= M (marked
    /// delivered). Records with D > M are discarded once t > s + M.
    std::vector<DuelRecord> poll(std::int64_t t, int threshold);

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::size_t dropped() const { return dropped_; }

private:
    std::deque<DuelRecord> records_;
    std::size_t dropped_ = 0;
};

}  // namespace duelay

#pragma once

#include "duelay/delay.hpp"
#include "duelay/environment.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>

namespace duelay {

/// How delayed or missing feedback enters the estimator.
enum class Variant {
    kIpw,        // every past round, label omega_{s,t} y_s
    kIgnore,     // delivered rounds only, label y_s
    kHeuristic,  // delivered rounds with y_s, the rest imputed from the previous estimate
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

using ArmPair = std::pair<std::size_t, std::size_t>;

/// One round of interaction. Implementations select a pair, and draw the
/// outcome and delay from the (seed, "pref", t) and (seed, "delay", t)
/// streams so every policy sharing a seed sees the same noise.
class DuelingPolicy {
public:
    virtual ~DuelingPolicy() = default;
    virtual ArmPair step(const ArmSet& arms, const Environment& env, const DelayModel& delay,
                         std::uint64_t seed) = 0;
};

/// Outcome of playing (first, second) in round `arms.round`.
DuelRecord play_duel(const ArmSet& arms, ArmPair pair, const Environment& env, const DelayModel& delay,
                     std::uint64_t seed);

/// Lowest index attaining the maximum.
std::size_t argmax_lowest(const Vec& scores);

}  // namespace duelay

#include "duelay/policy.hpp"

#include <stdexcept>
#include <string>

namespace duelay {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::kIpw: return "ipw";
        case Variant::kIgnore: return "ignore";
        case Variant::kHeuristic: return "heuristic";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    if (name == "ipw") return Variant::kIpw;
    if (name == "ignore") return Variant::kIgnore;
    if (name == "heuristic") return Variant::kHeuristic;
    throw std::invalid_argument("unknown variant '" + std::string(name) + "' (expected ipw, ignore or heuristic)");
}

DuelRecord play_duel(const ArmSet& arms, ArmPair pair, const Environment& env, const DelayModel& delay,
                     std::uint64_t seed) {
    const auto t = static_cast<std::uint64_t>(arms.round);
    DuelRecord rec;
    rec.round = arms.round;
    rec.first = arms.arm(pair.first);
    rec.second = arms.arm(pair.second);
    StreamRng pref = make_stream(seed, "pref", t);
    rec.preference = env.sample_preference(rec.first, rec.second, pref);
    StreamRng lag = make_stream(seed, "delay", t);
    rec.delay = delay.sample(lag);
    return rec;
}

std::size_t argmax_lowest(const Vec& scores) {
    if (scores.size() == 0) throw std::invalid_argument("argmax over an empty arm set");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return static_cast<std::size_t>(best);
}

}  // namespace duelay

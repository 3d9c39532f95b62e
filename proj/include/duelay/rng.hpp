#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace duelay {

/// Counter-based generator: output i of a stream is a SplitMix64 finaliser
/// applied to key + i * golden. Streams are addressed by (seed, name, index),
/// so the draws for round t never depend on how many draws other rounds made.
class StreamRng {
public:
    using result_type = std::uint64_t;

    explicit StreamRng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix(key_ + counter_ * kGolden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

constexpr std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Independent stream for (seed, name, index).
inline StreamRng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t k = StreamRng::mix(seed + 0x243f6a8885a308d3ULL);
    k = StreamRng::mix(k ^ hash_name(name));
    k = StreamRng::mix(k ^ (index * 0x9e3779b97f4a7c15ULL + 0x13198a2e03707344ULL));
    return StreamRng(k);
}

}  // namespace duelay

#pragma once

// Small deterministic hashing / RNG helpers. Everything downstream that
// must be reproducible across runs and platforms goes through these
// instead of implementation-defined stdlib distributions.

#include <cstdint>
#include <string>

namespace srel {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Uniform in [0, 1), a pure function of (seed, tag).
inline double keyed_uniform(std::uint64_t seed, const std::string& tag) {
    const std::uint64_t h = splitmix64(seed ^ fnv1a64(tag));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Stateful counter-based stream for places that need a sequence.
class SplitMixStream {
public:
    explicit SplitMixStream(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() { return splitmix64(state_++ ^ 0x2545f4914f6cdd1dULL); }
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    // Uniform integer in [0, n) by rejection-free scaling; n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n)) %
               n;
    }

private:
    std::uint64_t state_;
};

}  // namespace srel

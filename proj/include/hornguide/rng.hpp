#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hornguide {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG used everywhere. All integer/real draws are derived from
// mt19937_64 with our own fixed transforms, so streams are reproducible
// across platforms and independent of stdlib distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent stream for (seed, stream_id); used for per-anchor and
    // per-query streams so parallel schedules cannot change results.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s ^= stream * 0x9e3779b97f4a7c15ull + 0x165667b19e3779f9ull;
        std::uint64_t b = splitmix64(s);
        return Rng(a ^ (b + 0x2545f4914f6cdd1dull));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, n). Modulo bias is < n / 2^64, irrelevant at our scales.
    std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next_u64() % n; }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[index(v.size())];
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace hornguide

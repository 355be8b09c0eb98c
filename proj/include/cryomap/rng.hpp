#pragma once
#include <cmath>
#include <cstdint>

namespace cryomap {

// splitmix64: tiny, well-mixed generator. Used everywhere instead of the
// standard-library engines so streams are identical across standard libraries
// and the same (seed, stream id) pair always yields the same draws.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stateless mix of a seed and a stream id into a fresh starting state.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull + (stream << 1));
    splitmix64_next(s);
    splitmix64_next(s);
    return s;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix_seed(seed, stream)) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // multiply-shift; bias is negligible for n << 2^64 and irrelevant here
        return std::uint64_t((__uint128_t(next_u64()) * n) >> 64);
    }

    // standard normal via Box-Muller (no internal caching: two draws per call
    // keep the stream position a pure function of call count)
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

private:
    std::uint64_t state_;
};

} // namespace cryomap

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace mvmocap {

/// Deterministic, stdlib-independent random stream (splitmix64 core).
/// All pipeline randomness goes through this so that the same seed yields
/// byte-identical outputs across builds and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the n used here (n << 2^64).
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one value per call; no cached state,
    /// so interleaved streams stay reproducible).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        u1 = u1 > 0.0 ? u1 : 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Counter-based child stream: sample k of a master seed. Streams for
/// different k are independent and order-free, so per-sample generation is
/// reproducible regardless of generation order.
inline Rng substream(std::uint64_t master_seed, std::uint64_t counter) {
    Rng mixer(master_seed ^ (0x6a09e667f3bcc909ULL + counter * 0x9e3779b97f4a7c15ULL));
    std::uint64_t s = mixer.next_u64();
    return Rng(s ^ mixer.next_u64());
}

}  // namespace mvmocap

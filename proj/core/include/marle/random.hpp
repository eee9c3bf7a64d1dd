#pragma once

#include <cmath>
#include <cstdint>

namespace marle {

// Counter-based generator: the i-th draw of stream `seed` is
// splitmix64(seed + (i+1) * 0x9E3779B97F4A7C15), so any draw can be
// reproduced without replaying the stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    // uniform in [0,1) from the top 53 bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller, consumes two draws
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t counter() const { return counter_; }
    std::uint64_t seed() const { return seed_; }

    // independent stream for a sub-task
    CounterRng split(std::uint64_t tag) const { return CounterRng(mix(seed_ ^ mix(tag + 1))); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace marle

#pragma once

#include <cstdint>
#include <random>

namespace goblend {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stateless counter-based stream: the same (seed, counter, stream) always
// yields the same value, which keeps snapshot/restore and replay in lockstep.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter,
                                  std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(counter ^ splitmix64(stream)));
}

inline double u64_to_unit(std::uint64_t v) {
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// mt19937_64 wrapper. std::uniform_*_distribution is not pinned by the
// standard, so draws go through our own conversions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double unit() { return u64_to_unit(next_u64()); }

    // Uniform index in [0, n). Modulo draw; fine for the small n used here.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    // Box-Muller; two uniform draws per call.
    double gaussian() {
        double u1 = unit();
        double u2 = unit();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace goblend

#ifndef IFCAST_RNG_HPP
#define IFCAST_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace ifcast {

// Deterministic random stream. Gaussian and uniform draws are generated from
// raw mt19937_64 words so that sequences do not depend on the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller; the paired draw is cached.
    double next_gaussian();

    // Uniform integer in [0, n).
    std::uint64_t next_index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives the sub-stream seed for a named component from a global seed:
// splitmix64(global_seed ^ fnv1a64(label)). Every random quantity in the
// workbench draws from a stream seeded this way, so a run is a pure function
// of (config, global seed).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view label);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

} // namespace ifcast

#endif

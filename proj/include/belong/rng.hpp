#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace belong {

/// xoshiro256** seeded through SplitMix64.
///
/// Normals come from the Box-Muller transform on two uniforms; nothing is
/// routed through <random> distributions, whose output differs between
/// standard libraries. Parallel work never shares an Rng: each task builds
/// its own with derive(seed, stream), so results do not depend on scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    static Rng derive(std::uint64_t seed, std::uint64_t stream);
    Rng child(std::uint64_t stream) const { return derive(seed_, stream); }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Unbiased integer in [0, n).
    std::size_t index(std::size_t n);
    double normal();

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace belong

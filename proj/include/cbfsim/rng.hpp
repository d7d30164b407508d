#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace cbfsim
{

using Rng = std::mt19937_64;

/// Named per-purpose random streams derived from one master seed.
///
/// Each stream is seeded from a hash of (master_seed, name, index), so a
/// component that draws more or fewer numbers from its own stream cannot
/// shift the realizations seen by any other component.
class RngStreams
{
public:
    explicit RngStreams(std::uint64_t master_seed) : master_seed_{master_seed} {}

    std::uint64_t master_seed() const { return master_seed_; }

    Rng stream(std::string_view name, std::uint64_t index = 0) const;

    /// Stream names used by the simulator.
    static constexpr std::string_view kTraffic = "traffic";
    static constexpr std::string_view kFading = "fading";
    static constexpr std::string_view kShadowing = "shadowing";
    static constexpr std::string_view kBackoff = "backoff";
    static constexpr std::string_view kCoordination = "coordination";
    static constexpr std::string_view kDeployment = "deployment";

private:
    std::uint64_t master_seed_;
};

/// Stable 64-bit mixing (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exponential draw with the given mean (inverse-CDF).
inline double exponential(Rng& rng, double mean)
{
    return -mean * std::log1p(-uniform01(rng));
}

/// Normal draw (Box-Muller, one variate per call so stream usage is fixed).
inline double normal(Rng& rng, double mean, double stddev)
{
    const double u1 = 1.0 - uniform01(rng); // (0, 1]
    const double u2 = uniform01(rng);
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [lo, hi] inclusive.
inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(span));
}

} // namespace cbfsim

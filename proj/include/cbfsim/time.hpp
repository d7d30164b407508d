#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace cbfsim
{

/// Simulation clock: integer nanoseconds since the start of the run.
using SimTime = std::chrono::duration<std::int64_t, std::nano>;

using namespace std::chrono_literals;

inline double to_seconds(SimTime t)
{
    return static_cast<double>(t.count()) * 1e-9;
}

/// Nearest nanosecond.
inline SimTime from_seconds(double s)
{
    return SimTime{static_cast<std::int64_t>(std::llround(s * 1e9))};
}

/// Rounds up to the next nanosecond; used for airtimes so a frame never
/// ends before its last bit.
inline SimTime airtime_from_seconds(double s)
{
    return SimTime{static_cast<std::int64_t>(std::ceil(s * 1e9 - 1e-6))};
}

inline SimTime from_micros(double us)
{
    return from_seconds(us * 1e-6);
}

} // namespace cbfsim

#pragma once

#include <compare>
#include <span>

namespace cbfsim
{

/// Dimensionless ratio in decibels (gains, losses, SINR, margins).
struct GainDb
{
    double value{0.0};

    constexpr auto operator<=>(const GainDb&) const = default;

    constexpr GainDb operator-() const { return GainDb{-value}; }
    constexpr GainDb operator+(GainDb o) const { return GainDb{value + o.value}; }
    constexpr GainDb operator-(GainDb o) const { return GainDb{value - o.value}; }
};

/// Absolute power in dBm.
struct PowerDbm
{
    double value{0.0};

    constexpr auto operator<=>(const PowerDbm&) const = default;

    constexpr PowerDbm operator+(GainDb g) const { return PowerDbm{value + g.value}; }
    constexpr PowerDbm operator-(GainDb g) const { return PowerDbm{value - g.value}; }
    constexpr GainDb operator-(PowerDbm o) const { return GainDb{value - o.value}; }
};

/// Tolerance used for every power comparison in the simulator.
inline constexpr double kPowerToleranceDb = 1e-6;

double dbm_to_mw(PowerDbm p);

/// Throws std::domain_error for non-positive or non-finite input.
PowerDbm mw_to_dbm(double milliwatts);

/// Linear-domain sum of powers. Throws std::domain_error on an empty span.
PowerDbm sum_powers(std::span<const PowerDbm> powers);

/// Thermal noise floor: -174 dBm/Hz + 10 log10(B) + NF.
PowerDbm noise_floor(double bandwidth_hz, GainDb noise_figure);

/// Ratio in dB from a linear power ratio; the ratio must be positive.
GainDb linear_to_db(double ratio);
double db_to_linear(GainDb g);

} // namespace cbfsim

#include "cbfsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbfsim
{

namespace
{
constexpr double kThermalDensityDbmPerHz = -174.0;
}

double dbm_to_mw(PowerDbm p)
{
    return std::pow(10.0, p.value / 10.0);
}

PowerDbm mw_to_dbm(double milliwatts)
{
    if (!(milliwatts > 0.0) || !std::isfinite(milliwatts))
    {
        throw std::domain_error("mw_to_dbm: power must be positive and finite, got " +
                                std::to_string(milliwatts));
    }
    return PowerDbm{10.0 * std::log10(milliwatts)};
}

PowerDbm sum_powers(std::span<const PowerDbm> powers)
{
    if (powers.empty())
    {
        throw std::domain_error("sum_powers: empty sequence");
    }
    if (powers.size() == 1)
    {
        return powers.front();
    }
    // Factor out the largest term so very small powers do not underflow.
    double peak = powers.front().value;
    for (const auto& p : powers)
    {
        peak = std::max(peak, p.value);
    }
    double acc = 0.0;
    for (const auto& p : powers)
    {
        acc += std::pow(10.0, (p.value - peak) / 10.0);
    }
    return PowerDbm{peak + 10.0 * std::log10(acc)};
}

PowerDbm noise_floor(double bandwidth_hz, GainDb noise_figure)
{
    if (!(bandwidth_hz > 0.0))
    {
        throw std::domain_error("noise_floor: bandwidth must be positive");
    }
    return PowerDbm{kThermalDensityDbmPerHz + 10.0 * std::log10(bandwidth_hz) + noise_figure.value};
}

GainDb linear_to_db(double ratio)
{
    if (!(ratio > 0.0))
    {
        throw std::domain_error("linear_to_db: ratio must be positive");
    }
    return GainDb{10.0 * std::log10(ratio)};
}

double db_to_linear(GainDb g)
{
    return std::pow(10.0, g.value / 10.0);
}

} // namespace cbfsim

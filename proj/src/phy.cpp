#include "cbfsim/phy.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbfsim
{

namespace
{

struct Modulation
{
    int bits;
    double rate;
};

// 802.11ax MCS 0-11.
constexpr std::array<Modulation, 12> kHeMcs{{
    {1, 1.0 / 2.0},
    {2, 1.0 / 2.0},
    {2, 3.0 / 4.0},
    {4, 1.0 / 2.0},
    {4, 3.0 / 4.0},
    {6, 2.0 / 3.0},
    {6, 3.0 / 4.0},
    {6, 5.0 / 6.0},
    {8, 3.0 / 4.0},
    {8, 5.0 / 6.0},
    {10, 3.0 / 4.0},
    {10, 5.0 / 6.0},
}};

} // namespace

std::vector<McsEntry> make_mcs_table(const PhyParams& params, std::span<const double> threshold_overrides)
{
    if (!threshold_overrides.empty() && threshold_overrides.size() != kHeMcs.size())
    {
        throw std::invalid_argument("MCS threshold override needs exactly 12 values");
    }
    const double gap = db_to_linear(params.shannon_gap);
    std::vector<McsEntry> table;
    table.reserve(kHeMcs.size());
    for (std::size_t i = 0; i < kHeMcs.size(); ++i)
    {
        McsEntry e;
        e.index = static_cast<int>(i);
        e.bits_per_subcarrier = kHeMcs[i].bits;
        e.code_rate = kHeMcs[i].rate;
        e.data_rate = params.data_subcarriers * e.bits_per_subcarrier * e.code_rate / params.symbol_s;
        e.spectral_efficiency = e.data_rate / params.bandwidth_hz;
        e.min_sinr = threshold_overrides.empty() ? linear_to_db((std::exp2(e.spectral_efficiency) - 1.0) * gap)
                                                 : GainDb{threshold_overrides[i]};
        table.push_back(e);
    }
    validate_mcs_table(table);
    return table;
}

void validate_mcs_table(std::span<const McsEntry> table)
{
    if (table.empty())
    {
        throw std::invalid_argument("MCS table is empty");
    }
    for (std::size_t i = 1; i < table.size(); ++i)
    {
        if (table[i].index <= table[i - 1].index || table[i].data_rate <= table[i - 1].data_rate ||
            table[i].min_sinr <= table[i - 1].min_sinr)
        {
            throw std::invalid_argument("MCS table not strictly increasing at entry " + std::to_string(i));
        }
    }
}

bool zf_feasible(int antennas, int streams, int nulls, int max_nulls)
{
    return antennas >= 1 && streams >= 1 && nulls >= 0 && streams + nulls <= antennas && nulls <= max_nulls;
}

bool zf_feasible(const ReceiveConfig& cfg, int max_nulls)
{
    return zf_feasible(cfg.antennas, cfg.streams, cfg.nulls, max_nulls);
}

GainDb array_gain(const ReceiveConfig& cfg)
{
    return linear_to_db(static_cast<double>(cfg.antennas - cfg.streams - cfg.nulls + 1));
}

GainDb post_filter_sinr(PowerDbm signal, std::span<const Interferer> interferers, PowerDbm noise,
                        const ReceiveConfig& cfg, GainDb suppression, int max_nulls)
{
    if (!zf_feasible(cfg, max_nulls))
    {
        throw std::invalid_argument("post_filter_sinr: infeasible ZF configuration (M=" +
                                    std::to_string(cfg.antennas) + ", K=" + std::to_string(cfg.streams) +
                                    ", V=" + std::to_string(cfg.nulls) + ")");
    }
    double total_mw = dbm_to_mw(noise);
    for (const auto& i : interferers)
    {
        total_mw += dbm_to_mw(i.nulled ? i.power - suppression : i.power);
    }
    return (signal + array_gain(cfg)) - mw_to_dbm(total_mw);
}

std::optional<McsEntry> select_mcs(GainDb sinr, std::span<const McsEntry> table)
{
    std::optional<McsEntry> best;
    for (const auto& e : table)
    {
        if (e.min_sinr.value <= sinr.value + kPowerToleranceDb)
        {
            best = e;
        }
        else
        {
            break;
        }
    }
    return best;
}

double phy_rate(const McsEntry& mcs, int streams)
{
    if (streams < 1)
    {
        throw std::invalid_argument("phy_rate: streams must be >= 1");
    }
    return mcs.data_rate * streams;
}

double tx_duration(std::size_t bytes, const McsEntry& mcs, int streams, double preamble_s)
{
    return preamble_s + 8.0 * static_cast<double>(bytes) / phy_rate(mcs, streams);
}

std::size_t bytes_that_fit(double budget_s, const McsEntry& mcs, int streams, double preamble_s)
{
    const double payload_s = budget_s - preamble_s;
    if (payload_s <= 0.0)
    {
        return 0;
    }
    return static_cast<std::size_t>(std::floor(payload_s * phy_rate(mcs, streams) / 8.0));
}

bool decode_success(GainDb worst_sinr, const McsEntry& mcs)
{
    return worst_sinr.value + kPowerToleranceDb >= mcs.min_sinr.value;
}

} // namespace cbfsim

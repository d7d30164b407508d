#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/units.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cbfsim
{

struct McsEntry
{
    int index{0};
    /// Data bits per second per Hz of occupied bandwidth (one stream).
    double spectral_efficiency{0.0};
    GainDb min_sinr{};
    /// Single-stream PHY rate in bit/s at the configured bandwidth.
    double data_rate{0.0};
    int bits_per_subcarrier{1};
    double code_rate{0.5};

    bool operator==(const McsEntry&) const = default;
};

struct PhyParams
{
    double bandwidth_hz{80e6};
    int data_subcarriers{980};
    double symbol_s{13.6e-6};
    double preamble_s{40e-6};
    /// Shannon-gap used to derive default MCS thresholds.
    GainDb shannon_gap{4.0};
};

/// HE MCS 0-11 with thresholds min_sinr(k) = 10 log10((2^SE_k - 1) * gap).
/// `threshold_overrides`, when non-empty, must hold 12 strictly increasing
/// values and replaces the derived thresholds.
std::vector<McsEntry> make_mcs_table(const PhyParams& params, std::span<const double> threshold_overrides = {});

/// Throws std::invalid_argument if the table violates the ordering invariants.
void validate_mcs_table(std::span<const McsEntry> table);

struct ReceiveConfig
{
    int antennas{1};
    int streams{1};
    int nulls{0};
    std::vector<NodeId> nulled_ids;
};

inline constexpr int kDefaultMaxNulls = 4;

bool zf_feasible(int antennas, int streams, int nulls, int max_nulls = kDefaultMaxNulls);
bool zf_feasible(const ReceiveConfig& cfg, int max_nulls = kDefaultMaxNulls);

/// Per-stream degrees-of-freedom gain of a ZF receiver: 10 log10(M - K - V + 1).
GainDb array_gain(const ReceiveConfig& cfg);

struct Interferer
{
    PowerDbm power;
    bool nulled{false};
};

/// SINR after the receive filter. Nulled interferers are attenuated by
/// `suppression`, the rest pass unattenuated. Throws std::invalid_argument
/// for a configuration that fails zf_feasible.
GainDb post_filter_sinr(PowerDbm signal, std::span<const Interferer> interferers, PowerDbm noise,
                        const ReceiveConfig& cfg, GainDb suppression, int max_nulls = kDefaultMaxNulls);

/// Highest-index entry whose threshold does not exceed `sinr`.
std::optional<McsEntry> select_mcs(GainDb sinr, std::span<const McsEntry> table);

double phy_rate(const McsEntry& mcs, int streams);

/// Preamble plus payload airtime in seconds.
double tx_duration(std::size_t bytes, const McsEntry& mcs, int streams, double preamble_s);

/// Largest payload (bytes) whose airtime fits in `budget_s`, at least 0.
std::size_t bytes_that_fit(double budget_s, const McsEntry& mcs, int streams, double preamble_s);

/// Step-function PER: success iff the worst-case SINR meets the threshold.
bool decode_success(GainDb worst_sinr, const McsEntry& mcs);

} // namespace cbfsim

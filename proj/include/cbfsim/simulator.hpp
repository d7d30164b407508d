#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/config.hpp"
#include "cbfsim/deployment.hpp"
#include "cbfsim/phy.hpp"
#include "cbfsim/traffic.hpp"

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cbfsim
{

enum class Mode : std::uint8_t
{
    NoSr,
    Psr,
    Cbf,
};

/// "no-sr", "psr", "cbf".
std::string_view to_string(Mode m);
/// Throws std::invalid_argument for any other string.
Mode mode_from_string(std::string_view s);

/// One delivered packet that arrived after the warm-up.
struct LatencySample
{
    NodeId sta{0};
    TrafficClass cls{TrafficClass::Broadband};
    double arrival_s{0.0};
    double latency_s{0.0};
    int retries{0};

    bool operator==(const LatencySample&) const = default;
};

struct StaCounters
{
    NodeId sta{0};
    NodeId bss{0};
    TrafficClass cls{TrafficClass::Broadband};
    std::uint64_t generated{0};
    std::uint64_t delivered{0};
    std::uint64_t dropped{0};
    std::uint64_t queued{0};
    /// Dropped packets that arrived after the warm-up.
    std::uint64_t dropped_measured{0};
    /// Payload bits acknowledged inside the measurement interval.
    std::uint64_t delivered_bits_measured{0};
    double throughput_mbps{0.0};

    bool operator==(const StaCounters&) const = default;
};

struct ReuseCounters
{
    std::uint64_t windows{0};
    /// Devices granted a usable transmit power by a PSR field.
    std::uint64_t opportunities{0};
    std::uint64_t attempts{0};
    std::uint64_t successes{0};
    std::uint64_t cbf_txops{0};
    std::uint64_t protected_stas{0};

    bool operator==(const ReuseCounters&) const = default;
};

struct RunResult
{
    Mode mode{Mode::NoSr};
    std::uint64_t seed{0};
    std::uint64_t config_hash{0};
    /// Length of the measurement interval (duration - warm-up), seconds.
    double measured_s{0.0};
    std::vector<LatencySample> samples;
    std::vector<StaCounters> stas;
    std::uint64_t events{0};
    std::uint64_t txops{0};
    ReuseCounters reuse{};

    bool operator==(const RunResult&) const = default;
};

/// Raised when the simulator detects a broken internal invariant.
class InvariantViolation : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

/// Geometry, association and channel realisation of one seed.
struct Scenario
{
    std::vector<Node> nodes;
    std::size_t ap_count{0};
    ChannelMap channel;
    std::vector<McsEntry> mcs_table;
};

/// Draws positions (deployment stream), the channel (shadowing and fading
/// streams) and associates STAs. Throws ConfigError for an invalid config.
Scenario make_scenario(const RunConfig& cfg, std::uint64_t seed);

/// Simulates [0, duration]. Throws ConfigError before any event for an
/// invalid config and InvariantViolation on an internal inconsistency.
RunResult run(const RunConfig& cfg, Mode mode, std::uint64_t seed);

/// Runs seeds first_seed .. first_seed + count - 1 in order.
std::vector<RunResult> run_seeds(const RunConfig& cfg, Mode mode, std::uint64_t first_seed, std::size_t count);

} // namespace cbfsim

#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/rng.hpp"
#include "cbfsim/time.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cbfsim
{

enum class TrafficClass : std::uint8_t
{
    Broadband = 0,
    AugmentedReality = 1,
};

inline constexpr std::size_t kTrafficClassCount = 2;

std::string_view to_string(TrafficClass c);
/// Accepts "broadband" and "ar"; throws std::invalid_argument otherwise.
TrafficClass traffic_class_from_string(std::string_view s);

using PacketId = std::uint64_t;

struct Packet
{
    PacketId id{0};
    NodeId sta_id{0};
    TrafficClass cls{TrafficClass::Broadband};
    std::size_t size_bytes{0};
    SimTime arrival_time{};
    int retries{0};
    std::optional<SimTime> delivered_time;
};

/// Hands out run-wide unique packet ids.
class PacketIdAllocator
{
public:
    PacketId next() { return next_++; }

private:
    PacketId next_{0};
};

/// File arrival rate (files/s) that produces `offered_bps` with files of `size_bytes`.
double ftp3_rate(double offered_bps, std::size_t size_bytes);

/// FTP model 3: Poisson file arrivals of fixed size over [0, horizon).
std::vector<Packet> ftp3_arrivals(double rate_per_s, std::size_t size_bytes, SimTime horizon, Rng& rng,
                                  NodeId sta, PacketIdAllocator& ids);

/// Constant-bit-rate arrivals at offset, offset + period, ... < horizon.
/// Requires 0 <= offset < period.
std::vector<Packet> cbr_arrivals(SimTime period, std::size_t size_bytes, SimTime offset, SimTime horizon,
                                 NodeId sta, PacketIdAllocator& ids);

} // namespace cbfsim

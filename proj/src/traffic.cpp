#include "cbfsim/traffic.hpp"

#include <stdexcept>
#include <string>

namespace cbfsim
{

std::string_view to_string(TrafficClass c)
{
    switch (c)
    {
    case TrafficClass::Broadband:
        return "broadband";
    case TrafficClass::AugmentedReality:
        return "ar";
    }
    return "unknown";
}

TrafficClass traffic_class_from_string(std::string_view s)
{
    if (s == "broadband")
    {
        return TrafficClass::Broadband;
    }
    if (s == "ar")
    {
        return TrafficClass::AugmentedReality;
    }
    throw std::invalid_argument("unknown traffic class '" + std::string{s} + "'");
}

double ftp3_rate(double offered_bps, std::size_t size_bytes)
{
    if (!(offered_bps > 0.0) || size_bytes == 0)
    {
        throw std::invalid_argument("ftp3_rate: offered load and size must be positive");
    }
    return offered_bps / (8.0 * static_cast<double>(size_bytes));
}

std::vector<Packet> ftp3_arrivals(double rate_per_s, std::size_t size_bytes, SimTime horizon, Rng& rng,
                                  NodeId sta, PacketIdAllocator& ids)
{
    if (!(rate_per_s > 0.0))
    {
        throw std::invalid_argument("ftp3_arrivals: rate must be positive");
    }
    std::vector<Packet> out;
    double t = 0.0;
    const double end = to_seconds(horizon);
    for (;;)
    {
        t += exponential(rng, 1.0 / rate_per_s);
        if (t >= end)
        {
            break;
        }
        Packet p;
        p.id = ids.next();
        p.sta_id = sta;
        p.cls = TrafficClass::Broadband;
        p.size_bytes = size_bytes;
        p.arrival_time = from_seconds(t);
        out.push_back(p);
    }
    return out;
}

std::vector<Packet> cbr_arrivals(SimTime period, std::size_t size_bytes, SimTime offset, SimTime horizon,
                                 NodeId sta, PacketIdAllocator& ids)
{
    if (period <= SimTime::zero() || offset < SimTime::zero() || offset >= period)
    {
        throw std::invalid_argument("cbr_arrivals: need 0 <= offset < period");
    }
    std::vector<Packet> out;
    for (SimTime t = offset; t < horizon; t += period)
    {
        Packet p;
        p.id = ids.next();
        p.sta_id = sta;
        p.cls = TrafficClass::AugmentedReality;
        p.size_bytes = size_bytes;
        p.arrival_time = t;
        out.push_back(p);
    }
    return out;
}

} // namespace cbfsim

#include "cbfsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace cbfsim
{

double percentile_sorted(std::span<const double> sorted, double q, std::string_view label)
{
    if (sorted.empty())
    {
        throw std::invalid_argument("percentile: no samples for " + std::string(label.empty() ? "input" : label));
    }
    if (!(q > 0.0 && q <= 1.0))
    {
        throw std::invalid_argument("percentile: q must lie in (0, 1]");
    }
    const double n = static_cast<double>(sorted.size());
    // The epsilon keeps q*n that is an integer up to rounding from moving one rank up.
    auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

double percentile(std::span<const double> samples, double q, std::string_view label)
{
    std::vector<double> copy(samples.begin(), samples.end());
    std::sort(copy.begin(), copy.end());
    return percentile_sorted(copy, q, label);
}

LatencyStats latency_stats(std::vector<double> latencies, std::size_t dropped, TrafficClass cls)
{
    const auto label = to_string(cls);
    std::sort(latencies.begin(), latencies.end());
    LatencyStats s;
    s.cls = cls;
    s.n = latencies.size();
    s.median = percentile_sorted(latencies, 0.5, label);
    s.p95 = percentile_sorted(latencies, 0.95, label);
    s.p99 = percentile_sorted(latencies, 0.99, label);
    s.p9999 = percentile_sorted(latencies, 0.9999, label);
    s.drop_rate = static_cast<double>(dropped) / static_cast<double>(dropped + latencies.size());
    return s;
}

const ClassSummary* Summary::find(TrafficClass c) const
{
    for (const auto& cs : classes)
    {
        if (cs.latency.cls == c)
        {
            return &cs;
        }
    }
    return nullptr;
}

Summary aggregate(std::span<const RunResult> results)
{
    if (results.empty())
    {
        throw std::invalid_argument("aggregate: no results");
    }
    for (const auto& r : results)
    {
        if (r.config_hash != results.front().config_hash)
        {
            throw std::invalid_argument("aggregate: results come from different configs");
        }
        if (r.mode != results.front().mode)
        {
            throw std::invalid_argument("aggregate: results come from different modes");
        }
    }

    Summary out;
    out.mode = results.front().mode;
    out.runs = results.size();

    std::vector<double> lat[kTrafficClassCount];
    std::size_t drops[kTrafficClassCount] = {};
    std::map<NodeId, StaCounters> per_sta;
    for (const auto& r : results)
    {
        for (const auto& s : r.samples)
        {
            lat[static_cast<std::size_t>(s.cls)].push_back(s.latency_s);
        }
        for (const auto& c : r.stas)
        {
            drops[static_cast<std::size_t>(c.cls)] += c.dropped_measured;
            auto& acc = per_sta.try_emplace(c.sta, StaCounters{c.sta, c.bss, c.cls}).first->second;
            acc.generated += c.generated;
            acc.delivered += c.delivered;
            acc.dropped += c.dropped;
            acc.queued += c.queued;
            acc.dropped_measured += c.dropped_measured;
            acc.delivered_bits_measured += c.delivered_bits_measured;
            acc.throughput_mbps += c.throughput_mbps / static_cast<double>(results.size());
        }
    }
    for (auto& [id, c] : per_sta)
    {
        out.per_sta.push_back(c);
    }

    for (std::size_t k = 0; k < kTrafficClassCount; ++k)
    {
        const auto cls = static_cast<TrafficClass>(k);
        if (lat[k].empty())
        {
            continue;
        }
        ClassSummary cs;
        cs.latency = latency_stats(std::move(lat[k]), drops[k], cls);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& c : out.per_sta)
        {
            if (c.cls == cls)
            {
                sum += c.throughput_mbps;
                ++count;
            }
        }
        cs.mean_throughput_mbps = count > 0 ? sum / static_cast<double>(count) : 0.0;
        out.classes.push_back(cs);
    }
    return out;
}

} // namespace cbfsim

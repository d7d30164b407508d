#pragma once

#include "cbfsim/simulator.hpp"
#include "cbfsim/traffic.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cbfsim
{

/// Nearest-rank percentile of an ascending-sorted sequence: the element at
/// 1-based rank ceil(q * n). Throws std::invalid_argument for an empty
/// sequence (the message carries `label`) or q outside (0, 1].
double percentile_sorted(std::span<const double> sorted, double q, std::string_view label = "");

/// Same on unsorted input (sorts a copy).
double percentile(std::span<const double> samples, double q, std::string_view label = "");

struct LatencyStats
{
    TrafficClass cls{TrafficClass::Broadband};
    std::size_t n{0};
    /// Seconds.
    double median{0.0};
    double p95{0.0};
    double p99{0.0};
    double p9999{0.0};
    double drop_rate{0.0};
};

/// Throws std::invalid_argument (naming the class) for an empty sample set.
LatencyStats latency_stats(std::vector<double> latencies, std::size_t dropped, TrafficClass cls);

struct ClassSummary
{
    LatencyStats latency;
    /// Mean over STAs of the class of the per-STA throughput averaged over runs.
    double mean_throughput_mbps{0.0};
};

struct Summary
{
    Mode mode{Mode::NoSr};
    std::size_t runs{0};
    /// One entry per class that has at least one STA with latency samples.
    std::vector<ClassSummary> classes;
    /// Per-STA throughput averaged over runs, ordered by STA id.
    std::vector<StaCounters> per_sta;

    const ClassSummary* find(TrafficClass c) const;
};

/// Pools samples of all runs before computing percentiles. Throws
/// std::invalid_argument for an empty input, mixed modes or mixed config hashes.
Summary aggregate(std::span<const RunResult> results);

} // namespace cbfsim

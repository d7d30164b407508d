#pragma once

#include "cbfsim/simulator.hpp"
#include "cbfsim/stats.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cbfsim
{

/// One line of summary.csv; latencies in milliseconds.
struct SummaryRow
{
    std::string mode;
    std::string cls;
    std::size_t n{0};
    double median_ms{0.0};
    double p95_ms{0.0};
    double p99_ms{0.0};
    double p9999_ms{0.0};
    double drop_rate{0.0};
    double mean_throughput_mbps{0.0};

    bool operator==(const SummaryRow&) const = default;
};

std::vector<SummaryRow> summary_rows(const Summary& s);

/// Header: run_id,seed,mode,sta_id,class,arrival_s,latency_s,retries.
/// `run_id` is the index of the result in `results`.
void write_samples_csv(std::ostream& out, std::span<const RunResult> results);

/// Header: mode,class,n,median_ms,p95_ms,p99_ms,p9999_ms,drop_rate,mean_throughput_mbps.
/// Real-valued fields use six decimals; every line ends with a newline.
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

/// Inverse of write_summary_csv. Throws std::runtime_error on malformed input.
std::vector<SummaryRow> read_summary_csv(std::istream& in);

/// Writes `samples.csv` and `summary.csv` under `dir` (created if missing).
void emit_results(const std::filesystem::path& dir, std::span<const RunResult> results,
                  std::span<const SummaryRow> rows);

} // namespace cbfsim

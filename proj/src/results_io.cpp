#include "cbfsim/results_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cbfsim
{

namespace
{

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
    {
        out.push_back(field);
    }
    return out;
}

double to_double(const std::string& s)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
    {
        throw std::runtime_error("summary.csv: bad number '" + s + "'");
    }
    return v;
}

constexpr const char* kSummaryHeader = "mode,class,n,median_ms,p95_ms,p99_ms,p9999_ms,drop_rate,mean_throughput_mbps";

} // namespace

std::vector<SummaryRow> summary_rows(const Summary& s)
{
    std::vector<SummaryRow> rows;
    for (const auto& c : s.classes)
    {
        const auto& l = c.latency;
        rows.push_back({std::string(to_string(s.mode)), std::string(to_string(l.cls)), l.n, l.median * 1e3,
                        l.p95 * 1e3, l.p99 * 1e3, l.p9999 * 1e3, l.drop_rate, c.mean_throughput_mbps});
    }
    return rows;
}

void write_samples_csv(std::ostream& out, std::span<const RunResult> results)
{
    out << "run_id,seed,mode,sta_id,class,arrival_s,latency_s,retries\n";
    for (std::size_t i = 0; i < results.size(); ++i)
    {
        const auto& r = results[i];
        const auto mode = to_string(r.mode);
        for (const auto& s : r.samples)
        {
            out << i << ',' << r.seed << ',' << mode << ',' << s.sta << ',' << to_string(s.cls) << ','
                << fixed6(s.arrival_s) << ',' << fixed6(s.latency_s) << ',' << s.retries << '\n';
        }
    }
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows)
{
    out << kSummaryHeader << '\n';
    for (const auto& r : rows)
    {
        out << r.mode << ',' << r.cls << ',' << r.n << ',' << fixed6(r.median_ms) << ',' << fixed6(r.p95_ms) << ','
            << fixed6(r.p99_ms) << ',' << fixed6(r.p9999_ms) << ',' << fixed6(r.drop_rate) << ','
            << fixed6(r.mean_throughput_mbps) << '\n';
    }
}

std::vector<SummaryRow> read_summary_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kSummaryHeader)
    {
        throw std::runtime_error("summary.csv: missing or unexpected header");
    }
    std::vector<SummaryRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
        {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 9)
        {
            throw std::runtime_error("summary.csv: expected 9 fields in '" + line + "'");
        }
        SummaryRow r;
        r.mode = f[0];
        r.cls = f[1];
        r.n = static_cast<std::size_t>(to_double(f[2]));
        r.median_ms = to_double(f[3]);
        r.p95_ms = to_double(f[4]);
        r.p99_ms = to_double(f[5]);
        r.p9999_ms = to_double(f[6]);
        r.drop_rate = to_double(f[7]);
        r.mean_throughput_mbps = to_double(f[8]);
        rows.push_back(r);
    }
    return rows;
}

void emit_results(const std::filesystem::path& dir, std::span<const RunResult> results,
                  std::span<const SummaryRow> rows)
{
    std::filesystem::create_directories(dir);
    std::ofstream samples(dir / "samples.csv");
    std::ofstream summary(dir / "summary.csv");
    if (!samples || !summary)
    {
        throw std::runtime_error("cannot write results under " + dir.string());
    }
    write_samples_csv(samples, results);
    write_summary_csv(summary, rows);
}

} // namespace cbfsim

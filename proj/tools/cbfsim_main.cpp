// Batch driver: runs one mode (or all three with --compare) over a range of
// seeds and writes samples.csv and summary.csv.

#include "cbfsim/config.hpp"
#include "cbfsim/results_io.hpp"
#include "cbfsim/simulator.hpp"
#include "cbfsim/stats.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

void print_rows(const std::vector<cbfsim::SummaryRow>& rows)
{
    std::printf("%-6s %-10s %8s %10s %10s %10s %10s %9s %12s\n", "mode", "class", "n", "median_ms", "p95_ms",
                "p99_ms", "p9999_ms", "drop", "tput_mbps");
    for (const auto& r : rows)
    {
        std::printf("%-6s %-10s %8zu %10.3f %10.3f %10.3f %10.3f %9.5f %12.3f\n", r.mode.c_str(), r.cls.c_str(), r.n,
                    r.median_ms, r.p95_ms, r.p99_ms, r.p9999_ms, r.drop_rate, r.mean_throughput_mbps);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Uplink Wi-Fi latency simulator: no spatial reuse, PSR and coordinated beamforming"};
    std::string mode_name = "cbf";
    std::optional<std::string> config_path;
    std::uint64_t seed = 1;
    std::size_t seeds = 1;
    std::optional<double> duration_s;
    std::string out_dir = "results";
    bool compare = false;
    bool verbose = false;

    app.add_option("--mode", mode_name, "no-sr | psr | cbf")->check(CLI::IsMember({"no-sr", "psr", "cbf"}));
    app.add_option("--config", config_path, "key = value config file (defaults apply when omitted)");
    app.add_option("--seed", seed, "first master seed");
    app.add_option("--seeds", seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
    app.add_option("--duration-s", duration_s, "simulated seconds per seed (overrides sim.duration_s)");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--compare", compare, "run all three modes on paired seeds");
    app.add_flag("--verbose", verbose, "print event and spatial-reuse counters per mode");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try
    {
        cbfsim::RunConfig cfg = config_path ? cbfsim::parse_config(*config_path) : cbfsim::RunConfig{};
        if (duration_s)
        {
            cfg.duration_s = *duration_s;
        }
        cbfsim::validate_config(cfg);

        std::vector<cbfsim::Mode> modes;
        if (compare)
        {
            modes = {cbfsim::Mode::NoSr, cbfsim::Mode::Psr, cbfsim::Mode::Cbf};
        }
        else
        {
            modes = {cbfsim::mode_from_string(mode_name)};
        }

        std::vector<cbfsim::RunResult> all;
        std::vector<cbfsim::SummaryRow> rows;
        for (auto m : modes)
        {
            auto results = cbfsim::run_seeds(cfg, m, seed, seeds);
            if (verbose)
            {
                cbfsim::ReuseCounters reuse;
                std::uint64_t events = 0;
                std::uint64_t txops = 0;
                for (const auto& r : results)
                {
                    events += r.events;
                    txops += r.txops;
                    reuse.windows += r.reuse.windows;
                    reuse.opportunities += r.reuse.opportunities;
                    reuse.attempts += r.reuse.attempts;
                    reuse.successes += r.reuse.successes;
                    reuse.cbf_txops += r.reuse.cbf_txops;
                    reuse.protected_stas += r.reuse.protected_stas;
                }
                std::fprintf(stderr,
                             "%s: events=%llu txops=%llu windows=%llu opportunities=%llu attempts=%llu "
                             "successes=%llu cbf_txops=%llu protected=%llu\n",
                             std::string(cbfsim::to_string(m)).c_str(), static_cast<unsigned long long>(events),
                             static_cast<unsigned long long>(txops), static_cast<unsigned long long>(reuse.windows),
                             static_cast<unsigned long long>(reuse.opportunities),
                             static_cast<unsigned long long>(reuse.attempts),
                             static_cast<unsigned long long>(reuse.successes),
                             static_cast<unsigned long long>(reuse.cbf_txops),
                             static_cast<unsigned long long>(reuse.protected_stas));
            }
            const auto summary = cbfsim::aggregate(results);
            for (auto& r : cbfsim::summary_rows(summary))
            {
                rows.push_back(std::move(r));
            }
            for (auto& r : results)
            {
                all.push_back(std::move(r));
            }
        }
        cbfsim::emit_results(out_dir, all, rows);
        print_rows(rows);
        return 0;
    }
    catch (const cbfsim::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const cbfsim::InvariantViolation& e)
    {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    }
}

#include "cbfsim/config.hpp"
#include "cbfsim/results_io.hpp"
#include "cbfsim/rng.hpp"
#include "cbfsim/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace cbfsim;

namespace
{
// Smallest sample whose empirical CDF reaches num/10000; exact integer arithmetic, no sorting.
double percentile_oracle(const std::vector<double>& xs, long num)
{
    const long n = static_cast<long>(xs.size());
    double best = std::numeric_limits<double>::infinity();
    for (double x : xs)
    {
        long below = 0;
        for (double y : xs)
        {
            below += y <= x ? 1 : 0;
        }
        if (below * 10000 >= num * n)
        {
            best = std::min(best, x);
        }
    }
    return best;
}

RunResult fake_run(Rng& rng, std::uint64_t seed, std::size_t n_ar, std::size_t n_bb)
{
    RunResult r;
    r.mode = Mode::Psr;
    r.seed = seed;
    r.config_hash = 42;
    r.measured_s = 10.0;
    for (std::size_t i = 0; i < n_ar + n_bb; ++i)
    {
        LatencySample s;
        s.sta = static_cast<NodeId>(2 + i % 5);
        s.cls = i < n_ar ? TrafficClass::AugmentedReality : TrafficClass::Broadband;
        s.latency_s = exponential(rng, 0.01);
        r.samples.push_back(s);
    }
    StaCounters ar{2, 0, TrafficClass::AugmentedReality};
    ar.throughput_mbps = 0.03;
    StaCounters bb{3, 0, TrafficClass::Broadband};
    bb.throughput_mbps = 90.0 + 10.0 * uniform01(rng);
    r.stas = {ar, bb};
    return r;
}

const std::string& default_text()
{
    static const std::string text = [] {
        std::ifstream in(CBFSIM_DEFAULT_CONFIG);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }();
    return text;
}
} // namespace

TEST(Percentile, Examples)
{
    const std::vector<double> four{1, 2, 3, 4};
    EXPECT_EQ(percentile(four, 0.5), 2.0);
    std::vector<double> ten;
    for (int i = 10; i >= 1; --i)
    {
        ten.push_back(i);
    }
    EXPECT_EQ(percentile(ten, 0.9999), 10.0);
    EXPECT_EQ(percentile(ten, 0.1), 1.0);
    EXPECT_THROW(percentile(std::vector<double>{}, 0.5, "ar"), std::invalid_argument);
    EXPECT_THROW(percentile(four, 0.0), std::invalid_argument);
    EXPECT_THROW(percentile(four, 1.5), std::invalid_argument);
}

TEST(PercentileOracle, MatchesCountingDefinition)
{
    Rng rng(71);
    int mismatches = 0;
    const long fixed[] = {5000, 9500, 9900, 9999};
    for (int i = 0; i < 10000; ++i)
    {
        const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 120));
        std::vector<double> xs;
        for (std::size_t k = 0; k < n; ++k)
        {
            // Coarse values force ties.
            xs.push_back(uniform01(rng) < 0.3 ? static_cast<double>(uniform_int(rng, 0, 5)) : uniform01(rng));
        }
        const long num = i % 2 == 0 ? fixed[(i / 2) % 4] : static_cast<long>(uniform_int(rng, 1, 10000));
        mismatches += percentile(xs, static_cast<double>(num) / 10000.0) != percentile_oracle(xs, num) ? 1 : 0;
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(LatencyStats, OrderingAndDropRate)
{
    Rng rng(72);
    for (int i = 0; i < 1000; ++i)
    {
        std::vector<double> xs;
        for (int k = 0, n = static_cast<int>(uniform_int(rng, 1, 300)); k < n; ++k)
        {
            xs.push_back(exponential(rng, 0.005));
        }
        const auto dropped = static_cast<std::size_t>(uniform_int(rng, 0, 5));
        const auto s = latency_stats(xs, dropped, TrafficClass::AugmentedReality);
        ASSERT_LE(s.median, s.p95);
        ASSERT_LE(s.p95, s.p99);
        ASSERT_LE(s.p99, s.p9999);
        ASSERT_EQ(s.n, xs.size());
        ASSERT_DOUBLE_EQ(s.drop_rate, static_cast<double>(dropped) / static_cast<double>(dropped + xs.size()));
    }
    EXPECT_THROW(latency_stats({}, 0, TrafficClass::Broadband), std::invalid_argument);
}

TEST(PooledPercentileProperty, EqualsConcatenatedMultiset)
{
    Rng rng(73);
    for (int i = 0; i < 1000; ++i)
    {
        std::vector<RunResult> runs;
        std::vector<double> all;
        for (int k = 0, seeds = static_cast<int>(uniform_int(rng, 1, 8)); k < seeds; ++k)
        {
            runs.push_back(fake_run(rng, static_cast<std::uint64_t>(k), static_cast<std::size_t>(uniform_int(rng, 1, 60)),
                                    static_cast<std::size_t>(uniform_int(rng, 0, 10))));
            for (const auto& s : runs.back().samples)
            {
                if (s.cls == TrafficClass::AugmentedReality)
                {
                    all.push_back(s.latency_s);
                }
            }
        }
        const auto sum = aggregate(runs);
        const auto* ar = sum.find(TrafficClass::AugmentedReality);
        ASSERT_NE(ar, nullptr);
        ASSERT_EQ(ar->latency.n, all.size());
        ASSERT_EQ(ar->latency.median, percentile(all, 0.5));
        ASSERT_EQ(ar->latency.p99, percentile(all, 0.99));
        ASSERT_EQ(ar->latency.p9999, percentile(all, 0.9999));
    }
}

TEST(Aggregate, SingleRunAndGuards)
{
    Rng rng(74);
    const auto r = fake_run(rng, 1, 50, 20);
    const auto s = aggregate(std::span<const RunResult>(&r, 1));
    std::vector<double> ar;
    for (const auto& x : r.samples)
    {
        if (x.cls == TrafficClass::AugmentedReality)
        {
            ar.push_back(x.latency_s);
        }
    }
    const auto direct = latency_stats(ar, 0, TrafficClass::AugmentedReality);
    EXPECT_EQ(s.find(TrafficClass::AugmentedReality)->latency.p95, direct.p95);
    EXPECT_DOUBLE_EQ(s.find(TrafficClass::Broadband)->mean_throughput_mbps, r.stas[1].throughput_mbps);
    EXPECT_DOUBLE_EQ(s.find(TrafficClass::AugmentedReality)->mean_throughput_mbps, 0.03);

    std::vector<RunResult> mixed{r, r};
    mixed[1].config_hash = 7;
    EXPECT_THROW(aggregate(mixed), std::invalid_argument);
    mixed[1] = r;
    mixed[1].mode = Mode::Cbf;
    EXPECT_THROW(aggregate(mixed), std::invalid_argument);
    EXPECT_THROW(aggregate(std::vector<RunResult>{}), std::invalid_argument);
}

TEST(SummaryCsv, RoundTrip)
{
    Rng rng(75);
    std::vector<RunResult> runs{fake_run(rng, 1, 100, 30), fake_run(rng, 2, 100, 30)};
    const auto rows = summary_rows(aggregate(runs));
    ASSERT_EQ(rows.size(), 2u);
    std::stringstream ss;
    write_summary_csv(ss, rows);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
              "mode,class,n,median_ms,p95_ms,p99_ms,p9999_ms,drop_rate,mean_throughput_mbps");
    const auto back = read_summary_csv(ss);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        EXPECT_EQ(back[i].mode, rows[i].mode);
        EXPECT_EQ(back[i].cls, rows[i].cls);
        EXPECT_EQ(back[i].n, rows[i].n);
        EXPECT_NEAR(back[i].p9999_ms, rows[i].p9999_ms, 5e-7);
        EXPECT_NEAR(back[i].median_ms, rows[i].median_ms, 5e-7);
        EXPECT_NEAR(back[i].mean_throughput_mbps, rows[i].mean_throughput_mbps, 5e-7);
    }
    std::stringstream again;
    write_summary_csv(again, back);
    std::stringstream first;
    write_summary_csv(first, rows);
    EXPECT_EQ(again.str(), first.str());

    std::stringstream bad("mode,class\npsr,ar\n");
    EXPECT_THROW(read_summary_csv(bad), std::runtime_error);
}

TEST(SamplesCsv, HeaderAndRows)
{
    Rng rng(76);
    std::vector<RunResult> runs{fake_run(rng, 9, 3, 1)};
    std::stringstream ss;
    write_samples_csv(ss, runs);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "run_id,seed,mode,sta_id,class,arrival_s,latency_s,retries");
    int rows = 0;
    while (std::getline(ss, line))
    {
        EXPECT_EQ(line.rfind("0,9,psr,", 0), 0u);
        ++rows;
    }
    EXPECT_EQ(rows, 4);
}

TEST(EmitResults, WritesBothFiles)
{
    Rng rng(77);
    std::vector<RunResult> runs{fake_run(rng, 1, 10, 2)};
    const auto dir = std::filesystem::temp_directory_path() / "cbfsim_emit_test";
    std::filesystem::remove_all(dir);
    emit_results(dir, runs, summary_rows(aggregate(runs)));
    EXPECT_TRUE(std::filesystem::exists(dir / "samples.csv"));
    std::ifstream in(dir / "summary.csv");
    EXPECT_EQ(read_summary_csv(in).size(), 2u);
    std::filesystem::remove_all(dir);
}

TEST(Config, DefaultFileMatchesReferenceScenario)
{
    const auto c = parse_config_text(default_text());
    ASSERT_EQ(c.deployment.ap_positions.size(), 2u);
    EXPECT_DOUBLE_EQ(c.deployment.ap_positions[1].x - c.deployment.ap_positions[0].x, 15.0);
    EXPECT_DOUBLE_EQ(c.deployment.ap_positions[0].z, 3.0);
    EXPECT_EQ(c.deployment.room, (Position3D{35.0, 20.0, 3.0}));
    EXPECT_DOUBLE_EQ(c.deployment.sta_height, 1.0);
    EXPECT_EQ(c.deployment.n_broadband, 16);
    EXPECT_EQ(c.deployment.n_ar, 8);
    EXPECT_DOUBLE_EQ(c.traffic.ftp3_offered_mbps, 100.0);
    EXPECT_EQ(c.traffic.ftp3_size_bytes, 500000u);
    EXPECT_DOUBLE_EQ(c.traffic.ar_period_ms, 10.0);
    EXPECT_EQ(c.traffic.ar_size_bytes, 32u);
    EXPECT_DOUBLE_EQ(c.radio.channel.fc_ghz, 5.18);
    EXPECT_DOUBLE_EQ(c.radio.phy.bandwidth_hz, 80e6);
    EXPECT_EQ(c.radio.ap_antennas, 8);
    EXPECT_DOUBLE_EQ(c.radio.ap_power.value, 24.0);
    EXPECT_DOUBLE_EQ(c.radio.sta_power.value, 15.0);
    EXPECT_DOUBLE_EQ(c.radio.nf_ap.value, 7.0);
    EXPECT_DOUBLE_EQ(c.radio.nf_sta.value, 9.0);
    EXPECT_EQ(c.mac.timing.txop_limit, SimTime{4ms});
    EXPECT_EQ(c.mac.timing.slot, SimTime{9us});
    EXPECT_EQ(c.mac.timing.sifs, SimTime{16us});
    EXPECT_EQ(c.mac.timing.aifs, SimTime{34us});
    EXPECT_EQ(c.mac.timing.retry_limit, 10);
    EXPECT_DOUBLE_EQ(c.sr.params.suppression.value, 10.0);
    EXPECT_EQ(c.sr.params.max_nulls, 4);
    EXPECT_DOUBLE_EQ(c.duration_s, 30.0);
    EXPECT_DOUBLE_EQ(c.warmup_s, 1.0);
}

TEST(Config, UnknownKeyIsFatalAndNamed)
{
    try
    {
        parse_config_text(default_text() + "\nmac.foo = 1\n");
        FAIL() << "accepted an unknown key";
    }
    catch (const ConfigError& e)
    {
        EXPECT_EQ(e.key(), "mac.foo");
        EXPECT_NE(std::string(e.what()).find("mac.foo"), std::string::npos);
    }
}

TEST(Config, MissingDuplicateAndMalformed)
{
    for (const auto& key : mandatory_config_keys())
    {
        std::string text;
        std::istringstream in(default_text());
        std::string line;
        while (std::getline(in, line))
        {
            if (line.rfind(key + " ", 0) != 0)
            {
                text += line + "\n";
            }
        }
        try
        {
            parse_config_text(text);
            ADD_FAILURE() << "missing " << key << " accepted";
        }
        catch (const ConfigError& e)
        {
            EXPECT_EQ(e.key(), key);
        }
    }
    EXPECT_THROW(parse_config_text(default_text() + "sr.max_nulls = 4\n"), ConfigError);
    EXPECT_THROW(parse_config_text(default_text() + "sim.warmup_s = soon\n"), ConfigError);
    EXPECT_THROW(parse_config_text(default_text() + "just some words\n"), ConfigError);
    EXPECT_THROW(parse_config("/nonexistent/cbfsim.cfg"), ConfigError);
}

TEST(Config, RenderParsesBackToSameHash)
{
    const auto c = parse_config_text(default_text());
    const auto again = parse_config_text(render_config(c));
    EXPECT_EQ(render_config(again), render_config(c));
    EXPECT_EQ(config_hash(again), config_hash(c));
    auto d = c;
    d.sr.params.suppression = GainDb{0.0};
    EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, RangeValidation)
{
    auto c = parse_config_text(default_text());
    c.sr.params.max_nulls = 9;
    EXPECT_THROW(validate_config(c), ConfigError);
    c = parse_config_text(default_text());
    c.deployment.ap_positions[0].x = 99.0;
    EXPECT_THROW(validate_config(c), ConfigError);
    c = parse_config_text(default_text());
    c.mac.timing.cw_max = 7;
    EXPECT_THROW(validate_config(c), ConfigError);
}

#include "cbfsim/phy.hpp"
#include "cbfsim/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace cbfsim;

namespace
{
const std::vector<McsEntry>& table()
{
    static const auto t = make_mcs_table(PhyParams{});
    return t;
}

ReceiveConfig rx(int m, int k, int v)
{
    ReceiveConfig c;
    c.antennas = m;
    c.streams = k;
    c.nulls = v;
    return c;
}

// Independent reference: linear sums and a full scan of the table.
int oracle_mcs(double signal_dbm, const std::vector<Interferer>& ints, double noise_dbm, int m, int k, int v,
               double suppression_db, const std::vector<McsEntry>& t)
{
    double denom = std::pow(10.0, noise_dbm / 10.0);
    for (const auto& i : ints)
    {
        denom += std::pow(10.0, (i.power.value - (i.nulled ? suppression_db : 0.0)) / 10.0);
    }
    const double sinr = signal_dbm + 10.0 * std::log10(static_cast<double>(m - k - v + 1)) - 10.0 * std::log10(denom);
    int best = -1;
    for (const auto& e : t)
    {
        if (e.min_sinr.value <= sinr + kPowerToleranceDb && e.index > best)
        {
            best = e.index;
        }
    }
    return best;
}
} // namespace

TEST(ZfFeasible, Examples)
{
    EXPECT_TRUE(zf_feasible(8, 2, 4));
    EXPECT_FALSE(zf_feasible(8, 8, 1));
    EXPECT_TRUE(zf_feasible(8, 4, 4));
    EXPECT_FALSE(zf_feasible(8, 2, 5));
    EXPECT_FALSE(zf_feasible(8, 0, 0));
}

TEST(ArrayGain, Examples)
{
    EXPECT_NEAR(array_gain(rx(8, 2, 4)).value, 10.0 * std::log10(3.0), 1e-12);
    EXPECT_NEAR(array_gain(rx(8, 2, 4)).value, 4.77, 0.01);
    EXPECT_DOUBLE_EQ(array_gain(rx(1, 1, 0)).value, 0.0);
}

TEST(ArrayGain, ZeroWhenFullyLoaded)
{
    for (int m = 1; m <= 8; ++m)
    {
        for (int v = 0; v <= std::min(4, m - 1); ++v)
        {
            EXPECT_DOUBLE_EQ(array_gain(rx(m, m - v, v)).value, 0.0);
        }
    }
}

TEST(PostFilterSinr, Examples)
{
    const PowerDbm noise{-200.0};
    const std::vector<Interferer> one{{PowerDbm{-55.0}, true}};
    const GainDb s = post_filter_sinr(PowerDbm{-60.0}, one, noise, rx(1, 1, 0), GainDb{10.0});
    EXPECT_NEAR(s.value, -60.0 - (-65.0), 1e-6);

    const GainDb siso = post_filter_sinr(PowerDbm{-60.0}, {}, PowerDbm{-88.0}, rx(1, 1, 0), GainDb{10.0});
    EXPECT_DOUBLE_EQ(siso.value, 28.0);

    EXPECT_THROW(post_filter_sinr(PowerDbm{-60.0}, {}, PowerDbm{-88.0}, rx(8, 8, 1), GainDb{10.0}),
                 std::invalid_argument);
}

TEST(PostFilterSinrProperty, LargeSuppressionRemovesNulled)
{
    Rng rng(31);
    for (int i = 0; i < 2000; ++i)
    {
        std::vector<Interferer> all;
        std::vector<Interferer> kept;
        const auto n = uniform_int(rng, 0, 6);
        for (int j = 0; j < n; ++j)
        {
            const Interferer x{PowerDbm{-100.0 + 60.0 * uniform01(rng)}, uniform01(rng) < 0.5};
            all.push_back(x);
            if (!x.nulled)
            {
                kept.push_back(x);
            }
        }
        const PowerDbm sig{-80.0 + 50.0 * uniform01(rng)};
        const auto c = rx(8, static_cast<int>(uniform_int(rng, 1, 4)), static_cast<int>(uniform_int(rng, 0, 4)));
        ASSERT_NEAR(post_filter_sinr(sig, all, PowerDbm{-88.0}, c, GainDb{300.0}).value,
                    post_filter_sinr(sig, kept, PowerDbm{-88.0}, c, GainDb{0.0}).value, 1e-6);
    }
}

TEST(PostFilterSinrProperty, MonotoneInInterferenceAndSuppression)
{
    Rng rng(32);
    for (int i = 0; i < 2000; ++i)
    {
        std::vector<Interferer> ints;
        const auto n = uniform_int(rng, 1, 6);
        for (int j = 0; j < n; ++j)
        {
            ints.push_back({PowerDbm{-100.0 + 60.0 * uniform01(rng)}, uniform01(rng) < 0.5});
        }
        const PowerDbm sig{-70.0 + 30.0 * uniform01(rng)};
        const auto c = rx(8, 2, 2);
        const GainDb sup{20.0 * uniform01(rng)};
        const double base = post_filter_sinr(sig, ints, PowerDbm{-88.0}, c, sup).value;

        auto louder = ints;
        louder[static_cast<std::size_t>(uniform_int(rng, 0, n - 1))].power.value += 5.0 * uniform01(rng);
        ASSERT_LE(post_filter_sinr(sig, louder, PowerDbm{-88.0}, c, sup).value, base + 1e-12);
        ASSERT_GE(post_filter_sinr(sig, ints, PowerDbm{-88.0}, c, sup + GainDb{5.0 * uniform01(rng)}).value,
                  base - 1e-12);
    }
}

TEST(McsTable, DerivedThresholds)
{
    const auto& t = table();
    ASSERT_EQ(t.size(), 12u);
    EXPECT_NEAR(t[7].min_sinr.value, 17.36, 0.01);
    EXPECT_NO_THROW(validate_mcs_table(t));
    for (const auto& e : t)
    {
        const double se = e.data_rate / 80e6;
        EXPECT_NEAR(e.min_sinr.value, 10.0 * std::log10((std::exp2(se) - 1.0) * std::pow(10.0, 0.4)), 1e-9);
    }
}

TEST(McsTable, Overrides)
{
    std::vector<double> th;
    for (int i = 0; i < 12; ++i)
    {
        th.push_back(2.0 * i);
    }
    const auto t = make_mcs_table(PhyParams{}, th);
    EXPECT_DOUBLE_EQ(t[5].min_sinr.value, 10.0);
    th[3] = th[2];
    EXPECT_THROW(make_mcs_table(PhyParams{}, th), std::invalid_argument);
    th.pop_back();
    EXPECT_THROW(make_mcs_table(PhyParams{}, th), std::invalid_argument);
}

TEST(SelectMcs, Examples)
{
    const auto& t = table();
    EXPECT_EQ(select_mcs(t[7].min_sinr, t)->index, 7);
    EXPECT_FALSE(select_mcs(GainDb{-30.0}, t).has_value());
    EXPECT_EQ(select_mcs(GainDb{18.0}, t)->index, 7);
    EXPECT_GT(t[8].min_sinr.value, 18.0);
}

TEST(SelectMcsOracle, MatchesBruteForceScan)
{
    Rng rng(33);
    const auto& t = table();
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i)
    {
        const int m = static_cast<int>(uniform_int(rng, 1, 8));
        const int v = static_cast<int>(uniform_int(rng, 0, std::min(4, m - 1)));
        const int k = static_cast<int>(uniform_int(rng, 1, m - v));
        std::vector<Interferer> ints;
        const auto n = uniform_int(rng, 0, 5);
        for (int j = 0; j < n; ++j)
        {
            ints.push_back({PowerDbm{-110.0 + 70.0 * uniform01(rng)}, uniform01(rng) < 0.4});
        }
        const double sig = -95.0 + 65.0 * uniform01(rng);
        const double noise = -90.0 + 5.0 * uniform01(rng);
        const double sup = 15.0 * uniform01(rng);
        const auto got = select_mcs(post_filter_sinr(PowerDbm{sig}, ints, PowerDbm{noise}, rx(m, k, v), GainDb{sup}), t);
        const int want = oracle_mcs(sig, ints, noise, m, k, v, sup, t);
        mismatches += (got ? got->index : -1) != want ? 1 : 0;
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(Rates, Examples)
{
    const auto& t = table();
    EXPECT_NEAR(phy_rate(t[0], 1), 980 * 0.5 / 13.6e-6, 1e-3);
    EXPECT_NEAR(phy_rate(t[0], 1) / 1e6, 36.03, 0.01);
    EXPECT_NEAR(phy_rate(t[7], 1) / 1e6, 360.3, 0.1);
    EXPECT_NEAR(phy_rate(t[11], 1) / 1e6, 600.5, 0.1);
    EXPECT_THROW(phy_rate(t[0], 0), std::invalid_argument);
}

TEST(Airtime, Examples)
{
    const auto& t = table();
    EXPECT_NEAR(tx_duration(32, t[0], 1, 40e-6), 40e-6 + 256.0 / phy_rate(t[0], 1), 1e-12);
    EXPECT_NEAR(tx_duration(32, t[0], 1, 40e-6) * 1e6, 47.1, 0.05);

    const double payload7 = tx_duration(500000, t[7], 1, 0.0);
    EXPECT_NEAR(payload7 * 1e3, 11.10, 0.05);
    EXPECT_GE(std::ceil(payload7 / 4e-3), 3.0);

    EXPECT_NEAR(tx_duration(1500, t[4], 2, 0.0), tx_duration(1500, t[4], 1, 0.0) / 2.0, 1e-15);
}

TEST(Airtime, BytesThatFitIsTight)
{
    Rng rng(34);
    const auto& t = table();
    for (int i = 0; i < 2000; ++i)
    {
        const auto& mcs = t[static_cast<std::size_t>(uniform_int(rng, 0, 11))];
        const double budget = 4e-3 * uniform01(rng);
        const auto b = bytes_that_fit(budget, mcs, 1, 40e-6);
        if (b > 0)
        {
            ASSERT_LE(tx_duration(b, mcs, 1, 40e-6), budget + 1e-15);
        }
        ASSERT_GT(tx_duration(b + 1, mcs, 1, 40e-6), budget);
    }
}

TEST(DecodeSuccess, StepFunction)
{
    const auto& t = table();
    EXPECT_TRUE(decode_success(t[5].min_sinr, t[5]));
    EXPECT_FALSE(decode_success(t[5].min_sinr - GainDb{0.1}, t[5]));
    EXPECT_TRUE(decode_success(t[5].min_sinr + GainDb{20.0}, t[5]));
}

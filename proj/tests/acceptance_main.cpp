// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "cbfsim/config.hpp"
#include "cbfsim/phy.hpp"
#include "cbfsim/rng.hpp"
#include "cbfsim/simulator.hpp"
#include "cbfsim/spatial_reuse.hpp"
#include "cbfsim/stats.hpp"
#include "cbfsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace cbfsim;

namespace
{
constexpr std::size_t kSeeds = 8;
constexpr int kPropertyCases = 1000;

int g_failures = 0;

void report(int id, bool pass, const std::string& detail)
{
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    g_failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Summary summarize(const RunConfig& cfg, Mode m, std::size_t seeds)
{
    const auto runs = run_seeds(cfg, m, 1, seeds);
    return aggregate(runs);
}

const LatencyStats& ar(const Summary& s)
{
    return s.find(TrafficClass::AugmentedReality)->latency;
}

double broadband_tput(const Summary& s)
{
    return s.find(TrafficClass::Broadband)->mean_throughput_mbps;
}

// ---- criterion 5 oracles ---------------------------------------------------

int mcs_oracle(double sig, const std::vector<Interferer>& ints, double noise, int m, int k, int v, double sup,
               const std::vector<McsEntry>& t)
{
    double den = std::pow(10.0, noise / 10.0);
    for (const auto& i : ints)
    {
        den += std::pow(10.0, (i.power.value - (i.nulled ? sup : 0.0)) / 10.0);
    }
    const double sinr = sig + 10.0 * std::log10(m - k - v + 1.0) - 10.0 * std::log10(den);
    int best = -1;
    for (const auto& e : t)
    {
        if (e.min_sinr.value <= sinr + kPowerToleranceDb)
        {
            best = std::max(best, e.index);
        }
    }
    return best;
}

int mcs_mismatches()
{
    const auto t = make_mcs_table(PhyParams{});
    Rng rng(501);
    int bad = 0;
    for (int i = 0; i < 10000; ++i)
    {
        const int m = static_cast<int>(uniform_int(rng, 1, 8));
        const int v = static_cast<int>(uniform_int(rng, 0, std::min(4, m - 1)));
        const int k = static_cast<int>(uniform_int(rng, 1, m - v));
        std::vector<Interferer> ints;
        for (int j = 0, n = static_cast<int>(uniform_int(rng, 0, 5)); j < n; ++j)
        {
            ints.push_back({PowerDbm{-110.0 + 70.0 * uniform01(rng)}, uniform01(rng) < 0.4});
        }
        ReceiveConfig cfg;
        cfg.antennas = m;
        cfg.streams = k;
        cfg.nulls = v;
        const double sig = -95.0 + 65.0 * uniform01(rng);
        const double noise = -90.0 + 5.0 * uniform01(rng);
        const double sup = 15.0 * uniform01(rng);
        const auto got = select_mcs(post_filter_sinr(PowerDbm{sig}, ints, PowerDbm{noise}, cfg, GainDb{sup}), t);
        bad += (got ? got->index : -1) != mcs_oracle(sig, ints, noise, m, k, v, sup, t) ? 1 : 0;
    }
    return bad;
}

int percentile_mismatches()
{
    Rng rng(502);
    int bad = 0;
    for (int i = 0; i < 10000; ++i)
    {
        std::vector<double> xs;
        for (int k = 0, n = static_cast<int>(uniform_int(rng, 1, 200)); k < n; ++k)
        {
            xs.push_back(uniform01(rng) < 0.3 ? static_cast<double>(uniform_int(rng, 0, 5)) : uniform01(rng));
        }
        const long num = static_cast<long>(uniform_int(rng, 1, 10000));
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        const long n = static_cast<long>(sorted.size());
        // Smallest 1-based rank r with r / n >= num / 10000, in integers.
        long rank = 1;
        while (rank * 10000 < num * n)
        {
            ++rank;
        }
        bad += percentile(xs, static_cast<double>(num) / 10000.0) != sorted[static_cast<std::size_t>(rank - 1)] ? 1 : 0;
    }
    return bad;
}

// ---- criterion 6 properties ------------------------------------------------

bool power_algebra()
{
    Rng rng(601);
    for (int i = 0; i < kPropertyCases; ++i)
    {
        const PowerDbm p{-200.0 + 250.0 * uniform01(rng)};
        if (std::abs(mw_to_dbm(dbm_to_mw(p)).value - p.value) > 1e-9)
        {
            return false;
        }
        std::vector<PowerDbm> ps{p};
        for (int k = 0, n = static_cast<int>(uniform_int(rng, 0, 6)); k < n; ++k)
        {
            ps.push_back(PowerDbm{p.value - 60.0 * uniform01(rng)});
        }
        const double peak = std::max_element(ps.begin(), ps.end())->value;
        const double sum = sum_powers(ps).value;
        if (ps.size() == 1 ? std::abs(sum - peak) > kPowerToleranceDb : sum <= peak + kPowerToleranceDb)
        {
            return false;
        }
        const double bw = 1e3 + 1e9 * uniform01(rng);
        const double nf = 10.0 * uniform01(rng);
        if (!(noise_floor(bw * 1.01, GainDb{nf}) > noise_floor(bw, GainDb{nf})) ||
            !(noise_floor(bw, GainDb{nf + 0.01}) > noise_floor(bw, GainDb{nf})))
        {
            return false;
        }
    }
    return true;
}

PsrField random_field(Rng& rng)
{
    PsrField f;
    f.donor_tx_power = PowerDbm{10.0 + 20.0 * uniform01(rng)};
    f.acceptable_interference = PowerDbm{-100.0 + 40.0 * uniform01(rng)};
    return f;
}

bool donor_protection()
{
    Rng rng(602);
    for (int i = 0; i < kPropertyCases; ++i)
    {
        const auto base = random_field(rng);
        const GainDb sup{20.0 * uniform01(rng)};
        std::vector<NodeId> prot;
        for (int j = 0, n = static_cast<int>(uniform_int(rng, 1, 6)); j < n; ++j)
        {
            prot.push_back(static_cast<NodeId>(10 + j));
        }
        const auto c = configure_cbf_txop(8, static_cast<int>(uniform_int(rng, 1, 4)), prot, base, 8, {}, sup, 4);
        for (NodeId p : c.protected_stas)
        {
            const GainDb loss{40.0 + 60.0 * uniform01(rng)};
            const auto a = evaluate_opportunity(p, base.donor_tx_power - loss, c.relaxed, PowerDbm{15.0}, PowerDbm{-1e3});
            if (!a || ((*a - loss) - sup).value > base.acceptable_interference.value + kPowerToleranceDb)
            {
                return false;
            }
        }
    }
    return true;
}

bool opportunity_superset(const RunConfig& cfg)
{
    const auto& sr = cfg.sr.params;
    Rng rng(603);
    int cases = 0;
    for (std::uint64_t seed = 1; cases < kPropertyCases; ++seed)
    {
        auto sc = make_scenario(cfg, seed);
        for (int draw = 0; draw < 25; ++draw)
        {
            sc.channel.begin_block();
            const NodeId donor = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(sc.ap_count) - 1));
            std::vector<TriggerCandidate> cands;
            std::vector<NodeId> obss;
            for (const auto& n : sc.nodes)
            {
                if (!n.is_ap && n.bss == donor && uniform01(rng) < 0.6)
                {
                    const std::size_t b = n.cls == TrafficClass::Broadband ? 500000 : 32;
                    cands.push_back({n.id, n.cls, b, b, sc.channel.rx_power(n.tx_power, n.id, donor)});
                }
                if (!n.is_ap && n.bss != donor && n.cls == TrafficClass::AugmentedReality)
                {
                    obss.push_back(n.id);
                }
            }
            TriggerParams p;
            p.antennas = cfg.radio.ap_antennas;
            p.nulls = static_cast<int>(std::min<std::size_t>(obss.size(), static_cast<std::size_t>(sr.max_nulls)));
            p.noise = sc.nodes[donor].noise;
            p.mcs_table = sc.mcs_table;
            const auto tf = build_trigger(donor, cands, TrafficClass::Broadband, p);
            if (!tf)
            {
                continue;
            }
            ++cases;
            const auto base = compute_psr_field(sc.nodes[donor].tx_power, *tf, sc.nodes[donor].noise, sr.safety_margin,
                                                sr.floor_below_noise);
            const auto c = configure_cbf_txop(p.antennas, tf->rx_config.streams, obss, base, p.antennas, {},
                                              sr.suppression, sr.max_nulls);
            for (NodeId d : obss)
            {
                const PowerDbm rpl = sc.channel.rx_power(sc.nodes[donor].tx_power, donor, d);
                const auto a = evaluate_opportunity(d, rpl, base, cfg.radio.sta_power, sr.min_usable_power);
                const auto b = evaluate_opportunity(d, rpl, c.relaxed, cfg.radio.sta_power, sr.min_usable_power);
                if (a && (!b || b->value < a->value - kPowerToleranceDb))
                {
                    return false;
                }
            }
        }
    }
    return true;
}

RunConfig small(const RunConfig& base, Rng& rng)
{
    RunConfig c = base;
    c.deployment.n_broadband = static_cast<int>(uniform_int(rng, 0, 6));
    c.deployment.n_ar = static_cast<int>(uniform_int(rng, 0, 6));
    c.duration_s = 0.02 + 0.15 * uniform01(rng);
    c.warmup_s = 0.02 * uniform01(rng);
    return c;
}

bool conservation_and_determinism(const RunConfig& base, bool& determinism)
{
    Rng rng(604);
    bool conserved = true;
    determinism = true;
    for (int i = 0; i < kPropertyCases; ++i)
    {
        const auto c = small(base, rng);
        const auto m = static_cast<Mode>(uniform_int(rng, 0, 2));
        const auto seed = static_cast<std::uint64_t>(uniform_int(rng, 1, 1 << 20));
        const auto a = run(c, m, seed);
        determinism = determinism && a == run(c, m, seed);
        for (const auto& s : a.stas)
        {
            conserved = conserved && s.generated == s.delivered + s.dropped + s.queued;
        }
    }
    return conserved;
}

bool ftp3_rate_ok(std::string& detail)
{
    const double lambda = ftp3_rate(100e6, 500000);
    const double horizon = 10.0;
    double total = 0.0;
    for (int i = 0; i < kPropertyCases; ++i)
    {
        Rng rng = RngStreams(static_cast<std::uint64_t>(i)).stream(RngStreams::kTraffic);
        PacketIdAllocator ids;
        total += static_cast<double>(ftp3_arrivals(lambda, 500000, from_seconds(horizon), rng, 0, ids).size());
    }
    const double rate = total / (kPropertyCases * horizon);
    const double se = std::sqrt(lambda / (kPropertyCases * horizon));
    detail = fmt("rate %.4f files/s, |delta| %.4f <= %.4f", rate, std::abs(rate - lambda), 3.0 * se);
    return std::abs(rate - lambda) <= 3.0 * se;
}

bool close_ratio(double a, double b, double lo, double hi)
{
    return b > 0.0 && a / b >= lo && a / b <= hi;
}
} // namespace

int main()
{
    const RunConfig cfg = parse_config(CBFSIM_DEFAULT_CONFIG);

    const Summary none = summarize(cfg, Mode::NoSr, kSeeds);
    const Summary psr = summarize(cfg, Mode::Psr, kSeeds);
    const Summary cbf = summarize(cfg, Mode::Cbf, kSeeds);
    const double t_none = ar(none).p9999 * 1e3;
    const double t_psr = ar(psr).p9999 * 1e3;
    const double t_cbf = ar(cbf).p9999 * 1e3;

    report(1, t_cbf < t_psr && t_psr <= t_none && t_none > 100.0,
           fmt("AR p99.99 no-SR %.2f ms, PSR %.2f ms, CBF %.2f ms (need CBF < PSR <= no-SR, no-SR > 100 ms)", t_none,
               t_psr, t_cbf));
    report(2, t_psr / t_cbf >= 4.0, fmt("PSR/CBF p99.99 ratio %.2f (need >= 4)", t_psr / t_cbf));
    report(3, ar(none).median * 1e3 <= 5.0, fmt("no-SR AR median %.3f ms (need <= 5 ms)", ar(none).median * 1e3));

    const double tp[] = {broadband_tput(none), broadband_tput(psr), broadband_tput(cbf)};
    const double tp_max = *std::max_element(std::begin(tp), std::end(tp));
    const double tp_min = *std::min_element(std::begin(tp), std::end(tp));
    report(4, tp_min > 0.0 && (tp_max - tp_min) / tp_min <= 0.20,
           fmt("broadband Mbit/s no-SR %.2f, PSR %.2f, CBF %.2f (max spread %.1f%%)", tp[0], tp[1], tp[2],
               100.0 * (tp_max - tp_min) / tp_min));

    const int mcs_bad = mcs_mismatches();
    const int pct_bad = percentile_mismatches();
    report(5, mcs_bad == 0 && pct_bad == 0,
           fmt("mismatches: SINR+MCS %.0f / 10000, percentile %.0f / 10000", mcs_bad, pct_bad));

    std::string ftp_detail;
    bool determinism = false;
    const bool p_power = power_algebra();
    const bool p_donor = donor_protection();
    const bool p_superset = opportunity_superset(cfg);
    const bool p_conserve = conservation_and_determinism(cfg, determinism);
    const bool p_ftp = ftp3_rate_ok(ftp_detail);
    std::string props;
    props += std::string("power-algebra ") + (p_power ? "ok" : "FAILED");
    props += std::string(", donor-protection ") + (p_donor ? "ok" : "FAILED");
    props += std::string(", opportunity-superset ") + (p_superset ? "ok" : "FAILED");
    props += std::string(", conservation ") + (p_conserve ? "ok" : "FAILED");
    props += std::string(", determinism ") + (determinism ? "ok" : "FAILED");
    props += ", ftp3 " + ftp_detail;
    report(6, p_power && p_donor && p_superset && p_conserve && determinism && p_ftp, props);

    RunConfig flat = cfg;
    flat.sr.params.suppression = GainDb{0.0};
    const Summary psr0 = summarize(flat, Mode::Psr, kSeeds);
    const Summary cbf0 = summarize(flat, Mode::Cbf, kSeeds);
    const auto& a0 = ar(psr0);
    const auto& c0 = ar(cbf0);
    const bool flat_ok = close_ratio(c0.median, a0.median, 0.75, 1.25) && close_ratio(c0.p95, a0.p95, 0.75, 1.25) &&
                         close_ratio(c0.p99, a0.p99, 0.75, 1.25) && close_ratio(c0.p9999, a0.p9999, 0.5, 2.0);

    RunConfig lone = cfg;
    lone.deployment.ap_positions.resize(1);
    lone.duration_s = 10.0;
    bool lone_ok = true;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
        const auto a = run(lone, Mode::NoSr, seed);
        for (Mode m : {Mode::Psr, Mode::Cbf})
        {
            const auto b = run(lone, m, seed);
            lone_ok = lone_ok && a.samples == b.samples && a.stas == b.stas && a.events == b.events;
        }
    }
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "suppression 0: CBF/PSR AR median %.3f, p95 %.3f, p99 %.3f, p99.99 %.3f (%s); single AP identical: %s",
                  c0.median / a0.median, c0.p95 / a0.p95, c0.p99 / a0.p99, c0.p9999 / a0.p9999,
                  flat_ok ? "within tolerance" : "outside tolerance", lone_ok ? "yes" : "no");
    report(7, flat_ok && lone_ok, buf);

    return g_failures == 0 ? 0 : 1;
}

#include "cbfsim/spatial_reuse.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbfsim
{

PsrField compute_psr_field(PowerDbm donor_tx_power, const TriggerFrame& trigger, PowerDbm donor_noise,
                           GainDb safety_margin, GainDb floor_below_noise)
{
    if (trigger.schedule.empty())
    {
        throw std::invalid_argument("compute_psr_field: empty trigger schedule");
    }
    const GainDb gain = array_gain(trigger.rx_config);
    PowerDbm tolerable{trigger.schedule.front().predicted_signal + gain - trigger.schedule.front().mcs.min_sinr -
                       safety_margin};
    for (const auto& s : trigger.schedule)
    {
        tolerable = std::min(tolerable, s.predicted_signal + gain - s.mcs.min_sinr - safety_margin);
    }
    PsrField field;
    field.donor_tx_power = donor_tx_power;
    field.acceptable_interference = std::max(tolerable, donor_noise - floor_below_noise);
    return field;
}

PowerDbm allowed_power_uncapped(NodeId device, PowerDbm rpl, const PsrField& field)
{
    return PowerDbm{field.donor_tx_power.value + field.acceptable_for(device).value - rpl.value};
}

std::optional<PowerDbm> evaluate_opportunity(NodeId device, PowerDbm rpl, const PsrField& field, PowerDbm p_max,
                                             PowerDbm min_usable)
{
    const PowerDbm allowed = std::min(allowed_power_uncapped(device, rpl, field), p_max);
    if (allowed.value < min_usable.value - kPowerToleranceDb)
    {
        return std::nullopt;
    }
    return allowed;
}

bool CoordinationSet::contains_sta(NodeId sta) const
{
    return std::find(member_sta_ids.begin(), member_sta_ids.end(), sta) != member_sta_ids.end();
}

bool CoordinationSet::contains_ap(NodeId ap) const
{
    return std::find(ap_ids.begin(), ap_ids.end(), ap) != ap_ids.end();
}

std::vector<NodeId> CoordinationSet::shared_aps(NodeId donor) const
{
    std::vector<NodeId> out;
    for (auto a : ap_ids)
    {
        if (a != donor)
        {
            out.push_back(a);
        }
    }
    return out;
}

bool CoordinationSet::refresh_due(std::uint64_t txop_counter) const
{
    return refresh_period > 0 && txop_counter >= established_at + static_cast<std::uint64_t>(refresh_period);
}

std::optional<CoordinationSet> establish_coordination_set(std::span<const NodeView> nodes, const MeanRxFn& mean_rx,
                                                          PowerDbm threshold, int refresh_period,
                                                          std::uint64_t txop_counter)
{
    CoordinationSet set;
    set.refresh_period = refresh_period;
    set.established_at = txop_counter;
    for (const auto& n : nodes)
    {
        if (n.is_ap)
        {
            set.ap_ids.push_back(n.id);
        }
    }
    if (set.ap_ids.size() < 2)
    {
        return std::nullopt;
    }
    for (const auto& n : nodes)
    {
        if (n.is_ap)
        {
            continue;
        }
        for (auto ap : set.ap_ids)
        {
            if (ap != n.bss && mean_rx(n.id, ap, n.tx_power) > threshold)
            {
                set.member_sta_ids.push_back(n.id);
                break;
            }
        }
    }
    return set;
}

std::vector<NodeId> dynamic_coordination(const CoordinationSet& set, std::span<const NominationCandidate> candidates,
                                         int max_nulls)
{
    std::vector<NominationCandidate> pool;
    for (const auto& c : candidates)
    {
        if (c.cls == TrafficClass::AugmentedReality && c.has_queued && set.contains_sta(c.sta))
        {
            pool.push_back(c);
        }
    }
    std::sort(pool.begin(), pool.end(), [](const NominationCandidate& a, const NominationCandidate& b) {
        return a.interference_at_donor != b.interference_at_donor ? a.interference_at_donor > b.interference_at_donor
                                                                  : a.sta < b.sta;
    });
    std::vector<NodeId> out;
    for (const auto& c : pool)
    {
        if (static_cast<int>(out.size()) >= max_nulls)
        {
            break;
        }
        out.push_back(c.sta);
    }
    return out;
}

const CsiRecord* CsiCache::find(NodeId ap, NodeId sta) const
{
    const auto it = records_.find({ap, sta});
    return it == records_.end() ? nullptr : &it->second;
}

SimTime sequential_sounding(CsiCache& cache, std::span<const std::pair<NodeId, NodeId>> targets, SimTime now,
                            SimTime validity, SimTime overhead, const MeanRxFn& mean_rx,
                            std::span<const NodeView> nodes)
{
    const bool any_stale = std::any_of(targets.begin(), targets.end(), [&](const auto& t) {
        const auto* r = cache.find(t.first, t.second);
        return r == nullptr || r->stale(now);
    });
    if (!any_stale)
    {
        return SimTime::zero();
    }
    for (const auto& [ap, sta] : targets)
    {
        PowerDbm tx_power{};
        for (const auto& n : nodes)
        {
            if (n.id == sta)
            {
                tx_power = n.tx_power;
                break;
            }
        }
        cache.store(CsiRecord{ap, sta, mean_rx(sta, ap, tx_power), now, validity});
    }
    return overhead;
}

CbfTxopConfig configure_cbf_txop(int donor_antennas, int donor_streams, std::span<const NodeId> protected_ranked,
                                 const PsrField& base_field, int shared_antennas,
                                 std::span<const NodeId> donor_scheduled_ranked, GainDb suppression, int max_nulls)
{
    CbfTxopConfig out;
    out.relaxed = base_field;

    const int donor_budget = std::max(0, std::min(max_nulls, donor_antennas - donor_streams));
    const int v = std::min<int>(static_cast<int>(protected_ranked.size()), donor_budget);
    out.protected_stas.assign(protected_ranked.begin(), protected_ranked.begin() + v);

    out.donor.antennas = donor_antennas;
    out.donor.streams = donor_streams;
    out.donor.nulls = v;
    out.donor.nulled_ids = out.protected_stas;
    for (auto sta : out.protected_stas)
    {
        out.relaxed.per_device[sta] = base_field.acceptable_for(sta) + suppression;
    }

    if (out.protected_stas.empty())
    {
        out.shared = single_stream_config(shared_antennas);
        return out;
    }
    out.shared.antennas = shared_antennas;
    out.shared.streams = std::min<int>(static_cast<int>(out.protected_stas.size()), shared_antennas);
    const int shared_budget = std::max(0, std::min(max_nulls, shared_antennas - out.shared.streams));
    const int vs = std::min<int>(static_cast<int>(donor_scheduled_ranked.size()), shared_budget);
    out.shared.nulls = vs;
    out.shared.nulled_ids.assign(donor_scheduled_ranked.begin(), donor_scheduled_ranked.begin() + vs);
    return out;
}

ReceiveConfig single_stream_config(int antennas)
{
    ReceiveConfig cfg;
    cfg.antennas = antennas;
    cfg.streams = 1;
    cfg.nulls = 0;
    return cfg;
}

} // namespace cbfsim

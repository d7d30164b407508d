#include "cbfsim/deployment.hpp"

#include <stdexcept>

namespace cbfsim
{

std::vector<Position3D> place_nodes(const DeploymentConfig& cfg, Rng& rng)
{
    std::vector<Position3D> out(cfg.ap_positions.begin(), cfg.ap_positions.end());
    const int n_sta = cfg.n_broadband + cfg.n_ar;
    for (int i = 0; i < n_sta; ++i)
    {
        const double x = uniform01(rng) * cfg.room.x;
        const double y = uniform01(rng) * cfg.room.y;
        out.push_back({x, y, cfg.sta_height});
    }
    return out;
}

std::vector<NodeId> associate(const ChannelMap& channel, std::size_t ap_count, PowerDbm sta_power)
{
    if (ap_count == 0)
    {
        throw std::invalid_argument("associate: no APs");
    }
    std::vector<NodeId> out;
    for (auto sta = static_cast<NodeId>(ap_count); sta < channel.node_count(); ++sta)
    {
        NodeId best = 0;
        PowerDbm best_power = channel.mean_rx_power(sta_power, sta, 0);
        for (NodeId ap = 1; ap < ap_count; ++ap)
        {
            const PowerDbm p = channel.mean_rx_power(sta_power, sta, ap);
            if (p > best_power)
            {
                best = ap;
                best_power = p;
            }
        }
        out.push_back(best);
    }
    return out;
}

std::vector<Node> make_nodes(const RunConfig& cfg, const std::vector<Position3D>& positions,
                             const std::vector<NodeId>& serving_ap)
{
    const std::size_t ap_count = cfg.deployment.ap_positions.size();
    if (positions.size() != ap_count + serving_ap.size())
    {
        throw std::invalid_argument("make_nodes: positions and association disagree");
    }
    const auto& r = cfg.radio;
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < positions.size(); ++i)
    {
        Node n;
        n.id = static_cast<NodeId>(i);
        n.pos = positions[i];
        n.is_ap = i < ap_count;
        if (n.is_ap)
        {
            n.bss = n.id;
            n.tx_power = r.ap_power;
            n.noise = noise_floor(r.phy.bandwidth_hz, r.nf_ap);
            n.antennas = r.ap_antennas;
        }
        else
        {
            const std::size_t s = i - ap_count;
            n.bss = serving_ap[s];
            n.tx_power = r.sta_power;
            n.noise = noise_floor(r.phy.bandwidth_hz, r.nf_sta);
            n.antennas = 1;
            n.cls = s < static_cast<std::size_t>(cfg.deployment.n_broadband) ? TrafficClass::Broadband
                                                                              : TrafficClass::AugmentedReality;
        }
        nodes.push_back(n);
    }
    return nodes;
}

} // namespace cbfsim

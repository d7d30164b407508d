#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/config.hpp"
#include "cbfsim/rng.hpp"
#include "cbfsim/traffic.hpp"

#include <cstddef>
#include <vector>

namespace cbfsim
{

/// An AP or a STA. APs occupy ids [0, ap_count), STAs follow.
struct Node
{
    NodeId id{0};
    bool is_ap{false};
    /// Serving AP (the node itself for APs).
    NodeId bss{0};
    Position3D pos{};
    PowerDbm tx_power{};
    PowerDbm noise{};
    int antennas{1};
    /// Traffic class of a STA; meaningless for APs.
    TrafficClass cls{TrafficClass::Broadband};
};

/// APs at their configured positions, then n_broadband broadband STAs and
/// n_ar AR STAs uniformly over the room floor at the STA height.
std::vector<Position3D> place_nodes(const DeploymentConfig& cfg, Rng& rng);

/// Serving AP per STA: strongest mean received power, lowest id on ties.
std::vector<NodeId> associate(const ChannelMap& channel, std::size_t ap_count, PowerDbm sta_power);

/// Node records for a placed and associated deployment.
std::vector<Node> make_nodes(const RunConfig& cfg, const std::vector<Position3D>& positions,
                             const std::vector<NodeId>& serving_ap);

} // namespace cbfsim

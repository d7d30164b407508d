#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/units.hpp"

#include <map>

namespace cbfsim
{

/// Spatial-reuse parameters advertised in a trigger frame.
struct PsrField
{
    PowerDbm donor_tx_power{};
    PowerDbm acceptable_interference{};
    /// Coordinated-beamforming relaxations for individual OBSS devices.
    std::map<NodeId, PowerDbm> per_device;

    PowerDbm acceptable_for(NodeId device) const
    {
        const auto it = per_device.find(device);
        return it == per_device.end() ? acceptable_interference : it->second;
    }
};

} // namespace cbfsim

#include "cbfsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace cbfsim
{

double distance_2d(const Position3D& a, const Position3D& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double distance_3d(const Position3D& a, const Position3D& b)
{
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

double los_probability(double d_2d)
{
    if (d_2d < 0.0 || std::isnan(d_2d))
    {
        throw std::domain_error("los_probability: negative distance");
    }
    if (d_2d <= 5.0)
    {
        return 1.0;
    }
    if (d_2d <= 49.0)
    {
        return std::exp(-(d_2d - 5.0) / 70.8);
    }
    return 0.54 * std::exp(-(d_2d - 49.0) / 211.7);
}

Pathloss pathloss_inh(double d_3d, double fc_ghz, bool los)
{
    if (!(fc_ghz > 0.0))
    {
        throw std::domain_error("pathloss_inh: carrier frequency must be positive");
    }
    Pathloss out;
    if (d_3d < 1.0)
    {
        d_3d = 1.0;
        out.clamped = true;
    }
    const double log_d = std::log10(d_3d);
    const double log_f = std::log10(fc_ghz);
    const double pl_los = 32.4 + 17.3 * log_d + 20.0 * log_f;
    if (los)
    {
        out.loss = GainDb{pl_los};
        return out;
    }
    const double pl_nlos = 38.3 * log_d + 17.30 + 24.9 * log_f;
    out.loss = GainDb{std::max(pl_los, pl_nlos)};
    return out;
}

GainDb draw_shadowing(bool los, Rng& rng, ShadowingSigma sigma)
{
    return GainDb{normal(rng, 0.0, los ? sigma.los_db : sigma.nlos_db)};
}

PowerDbm received_power(PowerDbm tx_power, const LinkState& link)
{
    if (!link.initialized)
    {
        throw std::logic_error("received_power: link not initialized");
    }
    return tx_power - link.pathloss - link.shadowing + linear_to_db(link.block_fade);
}

PowerDbm mean_received_power(PowerDbm tx_power, const LinkState& link)
{
    if (!link.initialized)
    {
        throw std::logic_error("mean_received_power: link not initialized");
    }
    return tx_power - link.pathloss - link.shadowing;
}

ChannelMap::ChannelMap(std::span<const Position3D> positions, const ChannelParams& params,
                       Rng shadowing_rng, Rng fading_rng)
    : n_{positions.size()}, fading_key_{fading_rng()}
{
    links_.resize(n_ * (n_ > 0 ? n_ - 1 : 0) / 2);
    fade_block_.assign(links_.size(), 0);
    for (NodeId a = 0; a < n_; ++a)
    {
        for (NodeId b = a + 1; b < n_; ++b)
        {
            auto& l = links_[index(a, b)];
            l.tx_id = a;
            l.rx_id = b;
            const double p_los = los_probability(distance_2d(positions[a], positions[b]));
            l.los = uniform01(shadowing_rng) < p_los;
            const auto pl = pathloss_inh(distance_3d(positions[a], positions[b]), params.fc_ghz, l.los);
            l.pathloss = pl.loss;
            clamped_ += pl.clamped ? 1 : 0;
            l.shadowing = draw_shadowing(l.los, shadowing_rng, params.shadowing);
            l.block_fade = 1.0;
            l.initialized = true;
        }
    }
}

std::size_t ChannelMap::index(NodeId a, NodeId b) const
{
    if (a == b || a >= n_ || b >= n_)
    {
        throw std::out_of_range("ChannelMap: invalid link endpoints");
    }
    if (a > b)
    {
        std::swap(a, b);
    }
    // Row-major upper triangle without the diagonal.
    return static_cast<std::size_t>(a) * (2 * n_ - a - 1) / 2 + (b - a - 1);
}

const LinkState& ChannelMap::link(NodeId a, NodeId b)
{
    const auto i = index(a, b);
    if (fade_block_[i] != block_ + 1)
    {
        // Counter-based draw keyed by (link, block): independent of query order.
        const std::uint64_t bits = mix64(fading_key_ ^ mix64((static_cast<std::uint64_t>(i) << 32) ^ block_));
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        // Exponential with unit mean; clamp away from zero so dB stays finite.
        links_[i].block_fade = std::max(-std::log1p(-u), 1e-12);
        fade_block_[i] = block_ + 1;
    }
    return links_[i];
}

const LinkState& ChannelMap::link_no_fade(NodeId a, NodeId b) const
{
    return links_[index(a, b)];
}

} // namespace cbfsim

#pragma once

#include "cbfsim/rng.hpp"
#include "cbfsim/units.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cbfsim
{

using NodeId = std::uint32_t;

struct Position3D
{
    double x{0.0};
    double y{0.0};
    double z{0.0};

    bool operator==(const Position3D&) const = default;
};

double distance_2d(const Position3D& a, const Position3D& b);
double distance_3d(const Position3D& a, const Position3D& b);

/// Indoor-office LOS probability as a function of 2D distance (m).
/// Throws std::domain_error for negative distances.
double los_probability(double d_2d);

struct Pathloss
{
    GainDb loss;
    /// Set when the 3D distance was below 1 m and was clamped to 1 m.
    bool clamped{false};
};

/// InH-Office pathloss. The NLOS branch never falls below the LOS value.
Pathloss pathloss_inh(double d_3d, double fc_ghz, bool los);

struct ShadowingSigma
{
    double los_db{3.0};
    double nlos_db{8.03};
};

/// Zero-mean log-normal shadowing draw in dB.
GainDb draw_shadowing(bool los, Rng& rng, ShadowingSigma sigma = {});

/// Large-scale and block-fading state of one reciprocal link.
struct LinkState
{
    NodeId tx_id{0};
    NodeId rx_id{0};
    bool los{false};
    GainDb pathloss{};
    GainDb shadowing{};
    /// Linear power ratio, unit mean, redrawn once per coherence block.
    double block_fade{1.0};
    bool initialized{false};
};

/// tx_power - pathloss - shadowing + 10 log10(block_fade).
/// Throws std::logic_error if the link was never initialized.
PowerDbm received_power(PowerDbm tx_power, const LinkState& link);

/// Received power without the fast-fading term; used for association,
/// coordination-set membership and interferer ranking.
PowerDbm mean_received_power(PowerDbm tx_power, const LinkState& link);

struct ChannelParams
{
    double fc_ghz{5.18};
    ShadowingSigma shadowing{};
};

/// All pairwise links between a fixed set of nodes.
///
/// LOS state and shadowing are drawn once at construction from the
/// shadowing stream and frozen. Block fading (exponential, unit mean) is
/// redrawn lazily: a link picks up a fresh draw the first time it is used
/// after `begin_block()` advanced the block counter. The draw depends only
/// on (fading stream, link, block), never on the order of queries.
class ChannelMap
{
public:
    ChannelMap(std::span<const Position3D> positions, const ChannelParams& params, Rng shadowing_rng,
               Rng fading_rng);

    std::size_t node_count() const { return n_; }

    const LinkState& link(NodeId a, NodeId b);
    const LinkState& link_no_fade(NodeId a, NodeId b) const;

    PowerDbm rx_power(PowerDbm tx_power, NodeId from, NodeId to) { return received_power(tx_power, link(from, to)); }
    PowerDbm mean_rx_power(PowerDbm tx_power, NodeId from, NodeId to) const
    {
        return mean_received_power(tx_power, link_no_fade(from, to));
    }

    /// Starts a new fading block; subsequent link accesses see fresh fades.
    void begin_block() { ++block_; }
    std::uint64_t block() const { return block_; }

    /// Number of links whose 3D distance had to be clamped to 1 m.
    std::size_t clamped_links() const { return clamped_; }

private:
    std::size_t index(NodeId a, NodeId b) const;

    std::size_t n_;
    std::vector<LinkState> links_;
    std::vector<std::uint64_t> fade_block_;
    std::uint64_t block_{0};
    std::size_t clamped_{0};
    std::uint64_t fading_key_;
};

} // namespace cbfsim

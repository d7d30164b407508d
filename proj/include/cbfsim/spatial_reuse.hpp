#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/mac.hpp"
#include "cbfsim/phy.hpp"
#include "cbfsim/psr_field.hpp"
#include "cbfsim/time.hpp"
#include "cbfsim/traffic.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cbfsim
{

/// Thresholds and overheads of parameterised spatial reuse and CBF.
struct SpatialReuseParams
{
    GainDb safety_margin{3.0};
    /// acceptable_interference is never advertised below noise - this.
    GainDb floor_below_noise{10.0};
    PowerDbm min_usable_power{-10.0};
    /// Minimum trigger RPL for a device to act on the PSR field.
    PowerDbm trigger_sensitivity{-82.0};
    GainDb suppression{10.0};
    int max_nulls{kDefaultMaxNulls};
    PowerDbm coordination_threshold{-75.0};
    int refresh_period_txops{100};
    SimTime coordination_overhead{100us};
    SimTime sounding_overhead{300us};
    SimTime csi_validity{20ms};
    /// CBF phases run only when the planned reuse window is at least this long.
    SimTime min_reuse_window{500us};
};

/// Maximum interference the donor tolerates: the minimum over scheduled
/// STAs of (signal + array gain - MCS threshold - margin), floored at
/// noise - floor_below_noise. Throws std::invalid_argument for an empty schedule.
PsrField compute_psr_field(PowerDbm donor_tx_power, const TriggerFrame& trigger, PowerDbm donor_noise,
                           GainDb safety_margin, GainDb floor_below_noise);

/// Allowed transmit power of an OBSS device that measured `rpl` from the
/// trigger: (donor power + acceptable interference) - RPL, capped at
/// `p_max`. nullopt when the result is below `min_usable`.
std::optional<PowerDbm> evaluate_opportunity(NodeId device, PowerDbm rpl, const PsrField& field, PowerDbm p_max,
                                             PowerDbm min_usable);

/// Uncapped allowed power, exposed for the monotonicity properties.
PowerDbm allowed_power_uncapped(NodeId device, PowerDbm rpl, const PsrField& field);

/// Minimal view of a node used by the coordination procedures.
struct NodeView
{
    NodeId id{0};
    bool is_ap{false};
    /// Serving AP (the node itself for APs).
    NodeId bss{0};
    PowerDbm tx_power{};
    TrafficClass cls{TrafficClass::Broadband};
};

/// Mean received power of `tx_power` sent from `from` and heard at `to`.
using MeanRxFn = std::function<PowerDbm(NodeId from, NodeId to, PowerDbm tx_power)>;

/// Semi-static roster of collaborating APs and the STAs they may address.
struct CoordinationSet
{
    std::vector<NodeId> ap_ids;
    std::vector<NodeId> member_sta_ids;
    std::uint64_t established_at{0};
    int refresh_period{100};

    bool contains_sta(NodeId sta) const;
    bool contains_ap(NodeId ap) const;
    std::vector<NodeId> shared_aps(NodeId donor) const;
    /// Refresh is due at established_at + k * refresh_period.
    bool refresh_due(std::uint64_t txop_counter) const;
};

/// Builds the roster: every AP, plus every STA whose mean received power at
/// some foreign AP exceeds `threshold`. nullopt for fewer than two APs.
std::optional<CoordinationSet> establish_coordination_set(std::span<const NodeView> nodes, const MeanRxFn& mean_rx,
                                                          PowerDbm threshold, int refresh_period,
                                                          std::uint64_t txop_counter);

/// One OBSS STA the shared AP may nominate.
struct NominationCandidate
{
    NodeId sta{0};
    TrafficClass cls{TrafficClass::Broadband};
    bool has_queued{false};
    /// Mean received power of this STA at the donor AP.
    PowerDbm interference_at_donor{};
};

/// Shared-AP nomination: up to `max_nulls` AR STAs of the roster with
/// queued data, strongest interference at the donor first.
std::vector<NodeId> dynamic_coordination(const CoordinationSet& set, std::span<const NominationCandidate> candidates,
                                         int max_nulls);

struct CsiRecord
{
    NodeId ap{0};
    NodeId sta{0};
    PowerDbm link_power{};
    SimTime acquired_at{};
    SimTime validity{};

    bool stale(SimTime now) const { return now - acquired_at > validity; }
};

/// CSI kept by the collaborating APs, keyed by (ap, sta).
class CsiCache
{
public:
    const CsiRecord* find(NodeId ap, NodeId sta) const;
    void store(const CsiRecord& r) { records_[{r.ap, r.sta}] = r; }
    std::size_t size() const { return records_.size(); }

private:
    std::map<std::pair<NodeId, NodeId>, CsiRecord> records_;
};

/// Sequential sounding of the given (ap, sta) pairs. If any record is
/// missing or stale, every target is refreshed and `overhead` is returned;
/// otherwise nothing changes and zero airtime is charged.
SimTime sequential_sounding(CsiCache& cache, std::span<const std::pair<NodeId, NodeId>> targets, SimTime now,
                            SimTime validity, SimTime overhead, const MeanRxFn& mean_rx,
                            std::span<const NodeView> nodes);

struct CbfTxopConfig
{
    ReceiveConfig donor;
    PsrField relaxed;
    ReceiveConfig shared;
    /// Protected STAs after trimming to the donor's null budget.
    std::vector<NodeId> protected_stas;
};

/// Donor nulls toward the protected STAs (trimmed to fit, strongest kept),
/// the PSR field gains a +suppression override per protected STA, and the
/// shared AP nulls the strongest of the donor's scheduled STAs within its
/// own budget. `protected_ranked` and `donor_scheduled_ranked` must be in
/// decreasing order of interference at the respective AP.
CbfTxopConfig configure_cbf_txop(int donor_antennas, int donor_streams, std::span<const NodeId> protected_ranked,
                                 const PsrField& base_field, int shared_antennas,
                                 std::span<const NodeId> donor_scheduled_ranked, GainDb suppression, int max_nulls);

/// Receive configuration of an AP picking up a single unscheduled frame.
ReceiveConfig single_stream_config(int antennas);

} // namespace cbfsim

#pragma once

#include "cbfsim/channel.hpp"
#include "cbfsim/phy.hpp"
#include "cbfsim/psr_field.hpp"
#include "cbfsim/rng.hpp"
#include "cbfsim/time.hpp"
#include "cbfsim/traffic.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace cbfsim
{

struct MacTiming
{
    SimTime slot{9us};
    SimTime sifs{16us};
    SimTime aifs{34us};
    SimTime ack{44us};
    SimTime trigger{100us};
    SimTime txop_limit{4ms};
    int cw_min{15};
    int cw_max{1023};
    int retry_limit{10};
    PowerDbm cca_threshold{-82.0};
};

/// DCF backoff state of one contending node.
class ContentionState
{
public:
    explicit ContentionState(int cw_min = 15, int cw_max = 1023);

    int backoff_counter() const { return counter_; }
    int contention_window() const { return cw_; }
    /// True while a drawn counter has not been consumed by a channel grant.
    bool armed() const { return armed_; }

    void draw_backoff(Rng& rng);
    /// Overrides the drawn counter; used by tests and short re-contention.
    void set_backoff(int slots);
    void consume_slots(int slots);
    /// The countdown reached zero and the node took the medium.
    void granted() { armed_ = false; }

    void on_success() { cw_ = cw_min_; }
    /// Doubles the window: 15, 31, 63, ... capped at cw_max.
    void on_failure();

private:
    int cw_min_;
    int cw_max_;
    int cw_;
    int counter_{0};
    bool armed_{false};
};

/// Instant at which a countdown of `counter` slots finishes if the medium
/// stays idle from `idle_since`.
SimTime countdown_expiry(SimTime idle_since, int counter, const MacTiming& timing);

/// Whole idle slots elapsed between `idle_since` (+AIFS) and `busy_at`.
int slots_elapsed(SimTime idle_since, SimTime busy_at, const MacTiming& timing);

struct BusyInterval
{
    SimTime start;
    SimTime end;
};

/// DCF channel access against a known busy timeline at the node (intervals
/// sorted, non-overlapping). Draws a backoff if none is armed, counts down
/// idle slots after AIFS, freezes while busy, and returns the grant time.
SimTime contend(ContentionState& state, SimTime ready_at, std::span<const BusyInterval> busy,
                const MacTiming& timing, Rng& rng);

using TxId = std::uint64_t;

struct Transmission
{
    TxId id{0};
    NodeId tx{0};
    std::optional<NodeId> rx;
    PowerDbm power{};
    SimTime start{};
    SimTime end{};
    /// Identifies the TXOP the frame belongs to.
    std::uint64_t txop_tag{0};
    /// Frames modeled as reserving airtime but not interfering at receivers.
    bool interferes{true};
};

/// Transmissions currently on the air (single frequency channel).
class MediumState
{
public:
    /// Throws std::logic_error if end <= start or the id is already active.
    void add(const Transmission& t);
    /// Throws std::logic_error if the id is not active.
    void remove(TxId id);

    const std::vector<Transmission>& active() const { return active_; }
    const Transmission* find(TxId id) const;
    bool empty() const { return active_.empty(); }

private:
    std::vector<Transmission> active_;
};

/// Energy-detect carrier sense: sum of received powers of active
/// transmissions from other nodes compared against the CCA threshold.
/// Transmissions tagged `ignore_tag` are skipped. Frames flagged
/// non-interfering still count toward carrier sense.
template <class RxPowerFn>
bool cca_busy(NodeId node, const MediumState& medium, RxPowerFn&& rx_power, PowerDbm threshold,
              std::optional<std::uint64_t> ignore_tag = std::nullopt)
{
    double total_mw = 0.0;
    bool any = false;
    for (const auto& t : medium.active())
    {
        if (t.tx == node || (ignore_tag && t.txop_tag == *ignore_tag))
        {
            continue;
        }
        total_mw += dbm_to_mw(rx_power(t, node));
        any = true;
    }
    return any && total_mw >= dbm_to_mw(threshold) * (1.0 - 1e-12);
}

struct TriggerCandidate
{
    NodeId sta{0};
    TrafficClass cls{TrafficClass::Broadband};
    std::size_t queued_bytes{0};
    /// Bytes left in the head-of-line packet.
    std::size_t hol_bytes{0};
    /// Predicted received power at the AP for this TXOP.
    PowerDbm predicted_signal{};
};

struct TriggerParams
{
    int antennas{8};
    /// Receive nulls the AP reserves for OBSS devices in this TXOP.
    int nulls{0};
    int max_nulls{kDefaultMaxNulls};
    PowerDbm noise{};
    /// Airtime spent before the trigger frame (CBF coordination/sounding).
    SimTime overhead{};
    MacTiming timing{};
    double preamble_s{40e-6};
    std::span<const McsEntry> mcs_table;
};

struct ScheduledUplink
{
    NodeId sta{0};
    /// Offset of the TB PPDU from the TXOP start.
    SimTime start_offset{};
    SimTime duration{};
    McsEntry mcs{};
    std::size_t bytes{0};
    PowerDbm predicted_signal{};
    GainDb predicted_sinr{};
};

struct TriggerFrame
{
    NodeId donor_ap{0};
    TrafficClass cls{TrafficClass::Broadband};
    std::vector<ScheduledUplink> schedule;
    /// Whole TXOP from grant to end of the acknowledgement.
    SimTime txop_duration{};
    /// Common TB PPDU length (the uplink reception window).
    SimTime data_duration{};
    ReceiveConfig rx_config;
    std::optional<PsrField> psr_field;
};

/// Picks the traffic class (preferred one if it has queued STAs, else the
/// other), schedules up to M - V of its STAs longest-queue-first with one
/// stream each, assigns per-STA MCS from the predicted SINR, and trims the
/// TXOP to the longest PPDU. Returns nullopt when nothing is queued.
std::optional<TriggerFrame> build_trigger(NodeId donor_ap, std::span<const TriggerCandidate> candidates,
                                          TrafficClass preferred, const TriggerParams& params);

enum class TxOutcome : std::uint8_t
{
    /// Last chunk acknowledged; the packet left the queue.
    Delivered,
    /// A fragment was acknowledged; more of the packet remains.
    ChunkDelivered,
    /// Failed attempt; the packet stays at the head.
    Retry,
    /// Retry limit exceeded; the packet left the queue.
    Dropped,
};

struct OutcomeRecord
{
    TxOutcome outcome{TxOutcome::Retry};
    /// Copy of the packet for Delivered/Dropped outcomes.
    std::optional<Packet> packet;
};

/// Per-STA FIFO with head-of-line fragmentation and retry bookkeeping.
class UplinkQueue
{
public:
    void push(const Packet& p);

    bool empty() const { return packets_.empty(); }
    std::size_t size() const { return packets_.size(); }
    std::size_t queued_bytes() const { return queued_bytes_; }
    const Packet& head() const { return packets_.front(); }
    Packet& head() { return packets_.front(); }
    std::size_t head_remaining() const { return packets_.front().size_bytes - head_sent_; }
    int head_chunk_failures() const { return chunk_failures_; }

    /// Head-of-line data is currently on the air.
    bool in_flight() const { return in_flight_; }
    void set_in_flight(bool v) { in_flight_ = v; }
    bool has_sendable() const { return !packets_.empty() && !in_flight_; }

    const std::deque<Packet>& packets() const { return packets_; }

private:
    friend OutcomeRecord register_outcome(UplinkQueue&, std::size_t, bool, SimTime, int);

    std::deque<Packet> packets_;
    std::size_t queued_bytes_{0};
    std::size_t head_sent_{0};
    int chunk_failures_{0};
    bool in_flight_{false};
};

/// Applies the result of one head-of-line transmission of `chunk_bytes`.
OutcomeRecord register_outcome(UplinkQueue& queue, std::size_t chunk_bytes, bool success, SimTime now,
                               int retry_limit);

/// register_outcome plus the contention-window update of the sender:
/// reset on success or drop, doubling on a retry.
OutcomeRecord ack_and_retry(UplinkQueue& queue, std::size_t chunk_bytes, bool success, ContentionState& state,
                            SimTime now, int retry_limit);

} // namespace cbfsim

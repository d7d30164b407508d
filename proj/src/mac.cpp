#include "cbfsim/mac.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbfsim
{

ContentionState::ContentionState(int cw_min, int cw_max) : cw_min_{cw_min}, cw_max_{cw_max}, cw_{cw_min}
{
    if (cw_min < 0 || cw_max < cw_min)
    {
        throw std::invalid_argument("ContentionState: invalid contention window bounds");
    }
}

void ContentionState::draw_backoff(Rng& rng)
{
    counter_ = static_cast<int>(uniform_int(rng, 0, cw_));
    armed_ = true;
}

void ContentionState::set_backoff(int slots)
{
    if (slots < 0 || slots > cw_max_)
    {
        throw std::invalid_argument("ContentionState: backoff out of range");
    }
    counter_ = slots;
    armed_ = true;
}

void ContentionState::consume_slots(int slots)
{
    counter_ = std::max(0, counter_ - slots);
}

void ContentionState::on_failure()
{
    cw_ = std::min(2 * cw_ + 1, cw_max_);
}

SimTime countdown_expiry(SimTime idle_since, int counter, const MacTiming& timing)
{
    return idle_since + timing.aifs + counter * timing.slot;
}

int slots_elapsed(SimTime idle_since, SimTime busy_at, const MacTiming& timing)
{
    const SimTime counted = busy_at - idle_since - timing.aifs;
    if (counted <= SimTime::zero())
    {
        return 0;
    }
    return static_cast<int>(counted / timing.slot);
}

SimTime contend(ContentionState& state, SimTime ready_at, std::span<const BusyInterval> busy,
                const MacTiming& timing, Rng& rng)
{
    if (!state.armed())
    {
        state.draw_backoff(rng);
    }
    SimTime idle_since = ready_at;
    std::size_t i = 0;
    // Skip intervals already over, and start after the one in progress.
    while (i < busy.size() && busy[i].end <= idle_since)
    {
        ++i;
    }
    if (i < busy.size() && busy[i].start <= idle_since)
    {
        idle_since = busy[i].end;
        ++i;
    }
    for (;;)
    {
        const SimTime expiry = countdown_expiry(idle_since, state.backoff_counter(), timing);
        if (i >= busy.size() || busy[i].start >= expiry)
        {
            state.consume_slots(state.backoff_counter());
            state.granted();
            return expiry;
        }
        state.consume_slots(slots_elapsed(idle_since, busy[i].start, timing));
        idle_since = busy[i].end;
        ++i;
    }
}

void MediumState::add(const Transmission& t)
{
    if (t.end <= t.start)
    {
        throw std::logic_error("MediumState: transmission must end after it starts");
    }
    if (find(t.id) != nullptr)
    {
        throw std::logic_error("MediumState: duplicate transmission id");
    }
    active_.push_back(t);
}

void MediumState::remove(TxId id)
{
    const auto it = std::find_if(active_.begin(), active_.end(), [id](const Transmission& t) { return t.id == id; });
    if (it == active_.end())
    {
        throw std::logic_error("MediumState: removing unknown transmission");
    }
    active_.erase(it);
}

const Transmission* MediumState::find(TxId id) const
{
    for (const auto& t : active_)
    {
        if (t.id == id)
        {
            return &t;
        }
    }
    return nullptr;
}

std::optional<TriggerFrame> build_trigger(NodeId donor_ap, std::span<const TriggerCandidate> candidates,
                                          TrafficClass preferred, const TriggerParams& params)
{
    if (params.mcs_table.empty())
    {
        throw std::invalid_argument("build_trigger: empty MCS table");
    }
    auto has_class = [&](TrafficClass c) {
        return std::any_of(candidates.begin(), candidates.end(),
                           [c](const TriggerCandidate& x) { return x.cls == c && x.hol_bytes > 0; });
    };
    TrafficClass cls = preferred;
    if (!has_class(cls))
    {
        cls = cls == TrafficClass::Broadband ? TrafficClass::AugmentedReality : TrafficClass::Broadband;
        if (!has_class(cls))
        {
            return std::nullopt;
        }
    }

    std::vector<TriggerCandidate> pool;
    for (const auto& c : candidates)
    {
        if (c.cls == cls && c.hol_bytes > 0)
        {
            pool.push_back(c);
        }
    }
    std::sort(pool.begin(), pool.end(), [](const TriggerCandidate& a, const TriggerCandidate& b) {
        return a.queued_bytes != b.queued_bytes ? a.queued_bytes > b.queued_bytes : a.sta < b.sta;
    });

    const int max_streams = params.antennas - params.nulls;
    if (max_streams < 1)
    {
        return std::nullopt;
    }
    const int k = std::min<int>(static_cast<int>(pool.size()), max_streams);

    TriggerFrame tf;
    tf.donor_ap = donor_ap;
    tf.cls = cls;
    tf.rx_config.antennas = params.antennas;
    tf.rx_config.streams = k;
    tf.rx_config.nulls = params.nulls;
    if (!zf_feasible(tf.rx_config, params.max_nulls))
    {
        throw std::invalid_argument("build_trigger: infeasible receive configuration");
    }
    const GainDb gain = array_gain(tf.rx_config);

    const auto& t = params.timing;
    const SimTime prefix = params.overhead + t.trigger + t.sifs;
    const SimTime budget = t.txop_limit - prefix - t.sifs - t.ack;
    if (budget <= from_seconds(params.preamble_s))
    {
        return std::nullopt;
    }
    // One nanosecond of slack absorbs the round-up to integer nanoseconds.
    const double budget_s = to_seconds(budget - SimTime{1});

    SimTime longest{};
    for (int i = 0; i < k; ++i)
    {
        const auto& c = pool[static_cast<std::size_t>(i)];
        ScheduledUplink s;
        s.sta = c.sta;
        s.start_offset = prefix;
        s.predicted_signal = c.predicted_signal;
        s.predicted_sinr = (c.predicted_signal + gain) - params.noise;
        s.mcs = select_mcs(s.predicted_sinr, params.mcs_table).value_or(params.mcs_table.front());
        s.bytes = std::min(c.hol_bytes, bytes_that_fit(budget_s, s.mcs, 1, params.preamble_s));
        if (s.bytes == 0)
        {
            continue;
        }
        s.duration = airtime_from_seconds(tx_duration(s.bytes, s.mcs, 1, params.preamble_s));
        longest = std::max(longest, s.duration);
        tf.schedule.push_back(s);
    }
    if (tf.schedule.empty())
    {
        return std::nullopt;
    }
    tf.data_duration = longest;
    tf.txop_duration = prefix + longest + t.sifs + t.ack;
    return tf;
}

void UplinkQueue::push(const Packet& p)
{
    if (p.size_bytes == 0)
    {
        throw std::invalid_argument("UplinkQueue: empty packet");
    }
    packets_.push_back(p);
    queued_bytes_ += p.size_bytes;
}

OutcomeRecord register_outcome(UplinkQueue& queue, std::size_t chunk_bytes, bool success, SimTime now,
                               int retry_limit)
{
    if (queue.packets_.empty())
    {
        throw std::logic_error("register_outcome: empty queue");
    }
    queue.in_flight_ = false;
    OutcomeRecord rec;
    Packet& head = queue.packets_.front();
    if (success)
    {
        const std::size_t sent = std::min(chunk_bytes, head.size_bytes - queue.head_sent_);
        queue.head_sent_ += sent;
        queue.queued_bytes_ -= sent;
        queue.chunk_failures_ = 0;
        if (queue.head_sent_ < head.size_bytes)
        {
            rec.outcome = TxOutcome::ChunkDelivered;
            return rec;
        }
        head.delivered_time = now;
        rec.outcome = TxOutcome::Delivered;
        rec.packet = head;
        queue.packets_.pop_front();
        queue.head_sent_ = 0;
        return rec;
    }

    ++head.retries;
    ++queue.chunk_failures_;
    if (queue.chunk_failures_ > retry_limit)
    {
        rec.outcome = TxOutcome::Dropped;
        rec.packet = head;
        queue.queued_bytes_ -= head.size_bytes - queue.head_sent_;
        queue.packets_.pop_front();
        queue.head_sent_ = 0;
        queue.chunk_failures_ = 0;
        return rec;
    }
    rec.outcome = TxOutcome::Retry;
    return rec;
}

OutcomeRecord ack_and_retry(UplinkQueue& queue, std::size_t chunk_bytes, bool success, ContentionState& state,
                            SimTime now, int retry_limit)
{
    auto rec = register_outcome(queue, chunk_bytes, success, now, retry_limit);
    if (rec.outcome == TxOutcome::Retry)
    {
        state.on_failure();
    }
    else
    {
        state.on_success();
    }
    return rec;
}

} // namespace cbfsim

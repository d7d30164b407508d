#pragma once

#include "cbfsim/time.hpp"

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

namespace cbfsim
{

/// Dispatch order among events at the same instant.
enum class EventClass : std::uint8_t
{
    FrameEnd = 0,
    FrameStart = 1,
    Timer = 2,
    Arrival = 3,
};

template <class Payload>
struct Event
{
    SimTime time{};
    EventClass cls{EventClass::Timer};
    std::uint64_t sequence{0};
    Payload payload{};
};

/// Deterministic priority queue: total order by (time, class, sequence).
template <class Payload>
class EventQueue
{
public:
    /// Throws std::logic_error for a time earlier than the clock.
    void schedule(SimTime time, EventClass cls, Payload payload)
    {
        if (time < now_)
        {
            throw std::logic_error("EventQueue: event scheduled in the past");
        }
        heap_.push(Event<Payload>{time, cls, next_seq_++, std::move(payload)});
    }

    /// Throws std::logic_error on an empty queue.
    Event<Payload> dispatch_next()
    {
        if (heap_.empty())
        {
            throw std::logic_error("EventQueue: dispatch from an empty queue");
        }
        Event<Payload> e = heap_.top();
        heap_.pop();
        now_ = e.time;
        ++dispatched_;
        return e;
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    SimTime now() const { return now_; }
    SimTime next_time() const { return heap_.top().time; }
    std::uint64_t dispatched() const { return dispatched_; }

private:
    struct Later
    {
        bool operator()(const Event<Payload>& a, const Event<Payload>& b) const
        {
            if (a.time != b.time)
            {
                return a.time > b.time;
            }
            if (a.cls != b.cls)
            {
                return a.cls > b.cls;
            }
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event<Payload>, std::vector<Event<Payload>>, Later> heap_;
    SimTime now_{};
    std::uint64_t next_seq_{0};
    std::uint64_t dispatched_{0};
};

} // namespace cbfsim

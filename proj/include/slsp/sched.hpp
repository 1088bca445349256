#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <vector>

#include "slsp/types.hpp"
#include "slsp/wire.hpp"

namespace slsp::sched {

struct SchedConfig {
    /// Packets-per-round quanta, class 0 (highest priority) first. Must be
    /// strictly decreasing.
    std::vector<std::uint32_t> quanta = {8, 4, 2, 1};
    /// Ascending rate band boundaries in packets/second; one fewer than the
    /// number of classes. A queue at rate r lands in the first class whose
    /// boundary exceeds r.
    std::vector<double> rate_thresholds = {2.0, 8.0, 32.0};
    std::size_t queue_cap = 64;
    double starvation_timeout = 4.0;
};

enum class EnqueueResult { Queued, DroppedFull };

/// Per-source rate in packets/second, as measured by NLP.
using RateFn = std::function<double(const MacAddress&, SimTime)>;

struct SchedCounters {
    std::uint64_t served = 0;
    std::uint64_t dropped_full = 0;
    std::uint64_t dropped_starved = 0;
};

/// Anti-clogging scheduler. Inbound control packets queue per source MAC;
/// each round reclassifies queues by observed rate, then serves classes top
/// priority first, round-robin inside a class, one packet per queue per pass,
/// at most `quantum` passes per class.
class PacketScheduler {
public:
    PacketScheduler(SchedConfig cfg, RateFn rate_fn);

    EnqueueResult enqueue(wire::Frame frame, SimTime now);

    /// Serves one scheduling round; returns packets in service order.
    std::vector<wire::Frame> run_round(SimTime now);

    /// Drops packets queued longer than the starvation timeout.
    std::size_t drop_starved(SimTime now);

    /// Discards all pending packets (counters survive).
    void clear_pending();

    const SchedCounters& counters() const { return counters_; }
    std::size_t pending_total() const;
    std::size_t pending_of(const MacAddress& mac) const;
    std::uint64_t served_of(const MacAddress& mac) const;
    std::uint64_t served_last_round_of(const MacAddress& mac) const;
    unsigned class_of(const MacAddress& mac) const;
    unsigned classify(double rate) const;
    const SchedConfig& config() const { return cfg_; }

private:
    struct Pending {
        wire::Frame frame;
        SimTime enqueued_at;
    };

    struct Queue {
        std::deque<Pending> pending;
        unsigned cls = 0;
        std::uint64_t served = 0;
        std::uint64_t served_last_round = 0;
    };

    SchedConfig cfg_;
    RateFn rate_fn_;
    std::map<MacAddress, Queue> queues_;
    std::vector<MacAddress> resume_after_;  // per class: last-served MAC
    std::vector<bool> resume_valid_;
    SchedCounters counters_;
};

}  // namespace slsp::sched

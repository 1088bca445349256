#include "slsp/sched.hpp"

#include <algorithm>
#include <stdexcept>

namespace slsp::sched {

PacketScheduler::PacketScheduler(SchedConfig cfg, RateFn rate_fn)
    : cfg_(std::move(cfg)), rate_fn_(std::move(rate_fn)) {
    if (cfg_.quanta.empty()) throw std::invalid_argument("scheduler needs at least one class");
    if (cfg_.rate_thresholds.size() + 1 != cfg_.quanta.size())
        throw std::invalid_argument("rate thresholds must number one fewer than quanta");
    for (std::size_t i = 1; i < cfg_.quanta.size(); ++i)
        if (cfg_.quanta[i] >= cfg_.quanta[i - 1])
            throw std::invalid_argument("quanta must strictly decrease with class index");
    if (!std::is_sorted(cfg_.rate_thresholds.begin(), cfg_.rate_thresholds.end()))
        throw std::invalid_argument("rate thresholds must ascend");
    resume_after_.resize(cfg_.quanta.size());
    resume_valid_.resize(cfg_.quanta.size(), false);
}

unsigned PacketScheduler::classify(double rate) const {
    for (std::size_t i = 0; i < cfg_.rate_thresholds.size(); ++i)
        if (rate < cfg_.rate_thresholds[i]) return static_cast<unsigned>(i);
    return static_cast<unsigned>(cfg_.quanta.size() - 1);
}

EnqueueResult PacketScheduler::enqueue(wire::Frame frame, SimTime now) {
    Queue& q = queues_[frame.src_mac];
    EnqueueResult result = EnqueueResult::Queued;
    if (q.pending.size() >= cfg_.queue_cap) {
        q.pending.pop_front();  // drop-oldest favors fresh topology data
        ++counters_.dropped_full;
        result = EnqueueResult::DroppedFull;
    }
    q.pending.push_back(Pending{std::move(frame), now});
    return result;
}

std::vector<wire::Frame> PacketScheduler::run_round(SimTime now) {
    for (auto& [mac, q] : queues_) {
        q.cls = classify(rate_fn_(mac, now));
        q.served_last_round = 0;
    }

    std::vector<wire::Frame> order;
    for (unsigned cls = 0; cls < cfg_.quanta.size(); ++cls) {
        std::vector<MacAddress> members;
        for (auto& [mac, q] : queues_)
            if (q.cls == cls && !q.pending.empty()) members.push_back(mac);
        if (members.empty()) continue;

        // Rotate so service resumes after the class's last-served queue.
        std::size_t start = 0;
        if (resume_valid_[cls]) {
            auto it = std::upper_bound(members.begin(), members.end(), resume_after_[cls]);
            start = static_cast<std::size_t>(it - members.begin()) % members.size();
        }

        for (std::uint32_t pass = 0; pass < cfg_.quanta[cls]; ++pass) {
            bool any = false;
            for (std::size_t k = 0; k < members.size(); ++k) {
                const MacAddress& mac = members[(start + k) % members.size()];
                Queue& q = queues_[mac];
                if (q.pending.empty()) continue;
                order.push_back(std::move(q.pending.front().frame));
                q.pending.pop_front();
                ++q.served;
                ++q.served_last_round;
                ++counters_.served;
                resume_after_[cls] = mac;
                resume_valid_[cls] = true;
                any = true;
            }
            if (!any) break;
        }
    }
    return order;
}

std::size_t PacketScheduler::drop_starved(SimTime now) {
    std::size_t dropped = 0;
    for (auto& [mac, q] : queues_) {
        while (!q.pending.empty() && now - q.pending.front().enqueued_at > cfg_.starvation_timeout) {
            q.pending.pop_front();
            ++dropped;
            ++counters_.dropped_starved;
        }
    }
    return dropped;
}

void PacketScheduler::clear_pending() {
    for (auto& [mac, q] : queues_) q.pending.clear();
}

std::size_t PacketScheduler::pending_total() const {
    std::size_t n = 0;
    for (const auto& [mac, q] : queues_) n += q.pending.size();
    return n;
}

std::size_t PacketScheduler::pending_of(const MacAddress& mac) const {
    auto it = queues_.find(mac);
    return it == queues_.end() ? 0 : it->second.pending.size();
}

std::uint64_t PacketScheduler::served_of(const MacAddress& mac) const {
    auto it = queues_.find(mac);
    return it == queues_.end() ? 0 : it->second.served;
}

std::uint64_t PacketScheduler::served_last_round_of(const MacAddress& mac) const {
    auto it = queues_.find(mac);
    return it == queues_.end() ? 0 : it->second.served_last_round;
}

unsigned PacketScheduler::class_of(const MacAddress& mac) const {
    auto it = queues_.find(mac);
    return it == queues_.end() ? 0 : it->second.cls;
}

}  // namespace slsp::sched

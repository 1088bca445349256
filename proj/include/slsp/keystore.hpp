#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <vector>

#include "slsp/crypto.hpp"
#include "slsp/types.hpp"

namespace slsp::engine {

/// Bounded FIFO of validated (ip, public key, highest seq) entries. At most
/// one entry per ip; when full, the oldest insertion is evicted.
class KeyStore {
public:
    struct Entry {
        IpAddress ip;
        crypto::PublicKey key;
        std::uint32_t highest_seq = 0;
        SimTime stored_at = 0;
    };

    explicit KeyStore(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

    bool known(const IpAddress& ip) const { return index_.contains(ip); }

    const Entry* find(const IpAddress& ip) const {
        auto it = index_.find(ip);
        return it == index_.end() ? nullptr : &*it->second;
    }

    /// Inserts or replaces the entry for ip. Returns the evicted ip when the
    /// store was full and a FIFO eviction was needed.
    std::optional<IpAddress> insert(const IpAddress& ip, const crypto::PublicKey& key,
                                    std::uint32_t seq, SimTime now) {
        if (auto it = index_.find(ip); it != index_.end()) {
            fifo_.erase(it->second);
            index_.erase(it);
        }
        std::optional<IpAddress> evicted;
        if (fifo_.size() >= capacity_) {
            evicted = fifo_.front().ip;
            index_.erase(fifo_.front().ip);
            fifo_.pop_front();
        }
        fifo_.push_back(Entry{ip, key, seq, now});
        index_[ip] = std::prev(fifo_.end());
        return evicted;
    }

    void bump_seq(const IpAddress& ip, std::uint32_t seq) {
        if (auto it = index_.find(ip); it != index_.end() && seq > it->second->highest_seq)
            it->second->highest_seq = seq;
    }

    bool remove(const IpAddress& ip) {
        auto it = index_.find(ip);
        if (it == index_.end()) return false;
        fifo_.erase(it->second);
        index_.erase(it);
        return true;
    }

    std::size_t size() const { return fifo_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Entries sorted by ip, for deterministic snapshots.
    std::vector<Entry> snapshot() const {
        std::vector<Entry> out;
        out.reserve(index_.size());
        for (const auto& [ip, it] : index_) out.push_back(*it);
        return out;
    }

private:
    std::size_t capacity_;
    std::list<Entry> fifo_;  // insertion order, front = oldest
    std::map<IpAddress, std::list<Entry>::iterator> index_;
};

}  // namespace slsp::engine

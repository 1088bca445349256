#include "slsp/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slsp::nlp {

const char* to_string(NotificationKind kind) {
    switch (kind) {
        case NotificationKind::IpChanged: return "ip_changed";
        case NotificationKind::DuplicateIp: return "duplicate_ip";
        case NotificationKind::SelfMacSpoofed: return "self_mac_spoofed";
    }
    return "?";
}

std::optional<Notification> NeighborTable::observe_frame(const MacAddress& src_mac,
                                                         const IpAddress& src_ip, SimTime now,
                                                         const MacAddress& self_mac) {
    if (src_mac == self_mac)
        return Notification{NotificationKind::SelfMacSpoofed, src_mac, src_ip};

    if (auto owner = by_ip_.find(src_ip); owner != by_ip_.end() && owner->second != src_mac)
        return Notification{NotificationKind::DuplicateIp, src_mac, src_ip};

    auto it = by_mac_.find(src_mac);
    if (it != by_mac_.end() && it->second.ip != src_ip) {
        // The old binding stays until lost-neighbor expiry; a legitimate
        // address change looks like a fresh arrival after the silence.
        return Notification{NotificationKind::IpChanged, src_mac, src_ip};
    }

    if (it == by_mac_.end()) {
        NeighborEntry entry;
        entry.mac = src_mac;
        entry.ip = src_ip;
        entry.last_heard = now;
        entry.rate_estimate = std::numbers::ln2 / half_life_;
        entry.rate_updated_at = now;
        by_mac_.emplace(src_mac, entry);
        by_ip_[src_ip] = src_mac;
    } else {
        NeighborEntry& entry = it->second;
        const double decay = std::exp2(-(now - entry.rate_updated_at) / half_life_);
        entry.rate_estimate = entry.rate_estimate * decay + std::numbers::ln2 / half_life_;
        entry.rate_updated_at = now;
        entry.last_heard = now;
    }
    return std::nullopt;
}

double NeighborTable::rate_of(const MacAddress& mac, SimTime now) const {
    auto it = by_mac_.find(mac);
    if (it == by_mac_.end()) return 0.0;
    const NeighborEntry& entry = it->second;
    return entry.rate_estimate * std::exp2(-(now - entry.rate_updated_at) / half_life_);
}

std::vector<IpAddress> NeighborTable::expire_lost(SimTime now) {
    std::vector<IpAddress> expired;
    for (auto it = by_mac_.begin(); it != by_mac_.end();) {
        if (now - it->second.last_heard > lost_timeout_) {
            expired.push_back(it->second.ip);
            by_ip_.erase(it->second.ip);
            it = by_mac_.erase(it);
        } else {
            ++it;
        }
    }
    return expired;
}

void NeighborTable::mark_verified(const MacAddress& mac) {
    if (auto it = by_mac_.find(mac); it != by_mac_.end()) it->second.hello_verified = true;
}

const NeighborEntry* NeighborTable::find(const MacAddress& mac) const {
    auto it = by_mac_.find(mac);
    return it == by_mac_.end() ? nullptr : &it->second;
}

std::vector<IpAddress> NeighborTable::verified_neighbor_ips() const {
    std::vector<IpAddress> ips;
    for (const auto& [mac, entry] : by_mac_)
        if (entry.hello_verified) ips.push_back(entry.ip);
    std::sort(ips.begin(), ips.end());
    return ips;
}

std::vector<NeighborEntry> NeighborTable::snapshot() const {
    std::vector<NeighborEntry> out;
    out.reserve(by_mac_.size());
    for (const auto& [mac, entry] : by_mac_) out.push_back(entry);
    return out;
}

bool verify_hello(const wire::HelloPacket& hello, const engine::KeyStore& known_keys) {
    const auto* entry = known_keys.find(hello.ip);
    if (!entry) return false;
    const auto message = wire::signable_bytes(wire::Packet{hello});
    return crypto::verify(entry->key, message, hello.signature);
}

}  // namespace slsp::nlp

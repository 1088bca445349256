#pragma once

#include <map>
#include <optional>
#include <vector>

#include "slsp/keystore.hpp"
#include "slsp/types.hpp"
#include "slsp/wire.hpp"

namespace slsp::nlp {

struct NeighborEntry {
    MacAddress mac;
    IpAddress ip;
    SimTime last_heard = 0;
    double rate_estimate = 0;  // packets/second, exponentially weighted
    SimTime rate_updated_at = 0;
    bool hello_verified = false;
};

enum class NotificationKind {
    IpChanged,      // a known MAC showed up with a different IP
    DuplicateIp,    // an IP already bound to another MAC
    SelfMacSpoofed, // a frame carried our own MAC
};

const char* to_string(NotificationKind kind);

struct Notification {
    NotificationKind kind;
    MacAddress offending_mac;
    IpAddress offending_ip;
};

/// MAC<->IP binding table fed by overheard frames. Offending frames leave the
/// table untouched; the caller must discard them on any notification.
class NeighborTable {
public:
    NeighborTable(double ewma_half_life, double lost_neighbor_timeout)
        : half_life_(ewma_half_life), lost_timeout_(lost_neighbor_timeout) {}

    /// Updates bindings and the sender's rate estimate, or reports one of the
    /// three discrepancy rules. Precedence: SelfMacSpoofed > DuplicateIp >
    /// IpChanged; the first match wins and nothing is recorded.
    std::optional<Notification> observe_frame(const MacAddress& src_mac, const IpAddress& src_ip,
                                              SimTime now, const MacAddress& self_mac);

    /// Decayed packets/second estimate; 0 for unknown MACs.
    double rate_of(const MacAddress& mac, SimTime now) const;

    /// Removes entries idle longer than the lost-neighbor timeout and returns
    /// their ips so dependent routing state can be flushed.
    std::vector<IpAddress> expire_lost(SimTime now);

    void mark_verified(const MacAddress& mac);

    const NeighborEntry* find(const MacAddress& mac) const;
    bool has_ip(const IpAddress& ip) const { return by_ip_.contains(ip); }
    std::size_t size() const { return by_mac_.size(); }

    /// IPs of neighbors whose signed hello has been validated, ascending.
    std::vector<IpAddress> verified_neighbor_ips() const;

    /// Entries sorted by MAC.
    std::vector<NeighborEntry> snapshot() const;

    double half_life() const { return half_life_; }
    double lost_timeout() const { return lost_timeout_; }

private:
    double half_life_;
    double lost_timeout_;
    std::map<MacAddress, NeighborEntry> by_mac_;
    std::map<IpAddress, MacAddress> by_ip_;
};

/// True iff the hello's signature verifies under the key stored for its ip.
/// An unknown ip yields false; the caller keeps the binding as unverified.
bool verify_hello(const wire::HelloPacket& hello, const engine::KeyStore& known_keys);

}  // namespace slsp::nlp

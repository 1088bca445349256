#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "slsp/crypto.hpp"
#include "slsp/types.hpp"

namespace slsp::wire {

enum class PacketType : std::uint8_t {
    Hello = 0x01,
    Lsu = 0x02,
    Pkd = 0x03,
};

/// Signed (MAC_V, IP_V) commitment broadcast to neighbors.
struct HelloPacket {
    MacAddress mac;
    IpAddress ip;
    crypto::Signature signature;

    bool operator==(const HelloPacket&) const = default;
};

struct AttachedKey {
    crypto::PublicKey public_key;
    crypto::Certificate certificate;

    bool operator==(const AttachedKey&) const = default;
};

/// Link state update. The signature covers everything except ttl and
/// hops_traversed, which relays rewrite in flight.
struct LsuPacket {
    IpAddress originator_ip;
    std::uint32_t seq = 0;
    std::uint8_t r_lsu = 1;
    std::uint8_t ttl = 0;
    crypto::Digest zone_radius;     // X_R
    crypto::Digest hops_traversed;  // X_i at the current hop
    std::vector<IpAddress> links;
    std::optional<AttachedKey> attached_key;
    crypto::Signature signature;

    bool operator==(const LsuPacket&) const = default;
};

/// Standalone public key distribution packet. Shares the originator's LSU
/// sequence space and the LSU hash-chain propagation discipline.
struct PkdPacket {
    IpAddress originator_ip;
    std::uint32_t seq = 0;
    crypto::PublicKey public_key;
    crypto::Certificate certificate;
    std::uint8_t r_pkd = 1;
    std::uint8_t ttl = 0;
    crypto::Digest zone_radius;
    crypto::Digest hops_traversed;
    crypto::Signature signature;

    bool operator==(const PkdPacket&) const = default;
};

using Packet = std::variant<HelloPacket, LsuPacket, PkdPacket>;

PacketType type_of(const Packet& packet);

enum class DecodeError {
    Truncated,
    UnknownType,
    TrailingGarbage,
};

const char* to_string(DecodeError err);

/// Canonical byte layout: 1-byte type tag, fixed-width fields in declaration
/// order, big-endian integers, u16 link count before the link list, 1-byte
/// presence flag before an attached key. Rejects link lists over 65535.
std::vector<std::uint8_t> encode(const Packet& packet);

std::variant<Packet, DecodeError> decode(std::span<const std::uint8_t> bytes);

/// Exact byte string passed to sign/verify: the canonical encoding with ttl
/// and hops_traversed zeroed and the trailing signature omitted.
std::vector<std::uint8_t> signable_bytes(const Packet& packet);

/// Decoded view of one received transmission. src_mac and src_ip are the
/// transmitting interface's claimed addresses; adversaries may lie in both.
struct Frame {
    MacAddress src_mac;
    IpAddress src_ip;
    Packet payload;
};

/// On-air unit the simulator moves between nodes. The payload is an encoded
/// Packet, so receivers exercise the codec on every delivery.
struct RawFrame {
    MacAddress src_mac;
    IpAddress src_ip;
    std::vector<std::uint8_t> payload;
};

}  // namespace slsp::wire

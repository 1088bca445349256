#include "slsp/wire.hpp"

#include <cstring>
#include <stdexcept>

namespace slsp::wire {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }

    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v & 0xff));
    }

    void u32(std::uint32_t v) {
        for (int i = 3; i >= 0; --i)
            out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }

    void u64(std::uint64_t v) {
        for (int i = 7; i >= 0; --i)
            out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }

    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    void mac(const MacAddress& m) { bytes(m.octets); }
    void ip(const IpAddress& a) { u32(a.value); }
    void digest(const crypto::Digest& d) { bytes(d.bytes); }

    void zero_digest() { out_.insert(out_.end(), crypto::kDigestSize, 0); }

    void public_key(const crypto::PublicKey& k) {
        u64(k.key_id);
        bytes(k.tag);
    }

    void signature(const crypto::Signature& s) {
        u64(s.signer_key_id);
        digest(s.bytes);
    }

    void certificate(const crypto::Certificate& c) {
        ip(c.subject_ip);
        public_key(c.subject_public_key);
        signature(c.authority_signature);
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    bool truncated() const { return failed_; }
    bool exhausted() const { return pos_ == data_.size(); }

    std::uint8_t u8() {
        if (!need(1)) return 0;
        return data_[pos_++];
    }

    std::uint16_t u16() {
        if (!need(2)) return 0;
        std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        if (!need(4)) return 0;
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        if (!need(8)) return 0;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 8;
        return v;
    }

    MacAddress mac() {
        MacAddress m;
        if (!need(6)) return m;
        std::memcpy(m.octets.data(), data_.data() + pos_, 6);
        pos_ += 6;
        return m;
    }

    IpAddress ip() { return IpAddress{u32()}; }

    crypto::Digest digest() {
        crypto::Digest d;
        if (!need(crypto::kDigestSize)) return d;
        std::memcpy(d.bytes.data(), data_.data() + pos_, crypto::kDigestSize);
        pos_ += crypto::kDigestSize;
        return d;
    }

    crypto::PublicKey public_key() {
        crypto::PublicKey k;
        k.key_id = u64();
        if (!need(8)) return k;
        std::memcpy(k.tag.data(), data_.data() + pos_, 8);
        pos_ += 8;
        return k;
    }

    crypto::Signature signature() {
        crypto::Signature s;
        s.signer_key_id = u64();
        s.bytes = digest();
        return s;
    }

    crypto::Certificate certificate() {
        crypto::Certificate c;
        c.subject_ip = ip();
        c.subject_public_key = public_key();
        c.authority_signature = signature();
        return c;
    }

private:
    bool need(std::size_t n) {
        if (failed_ || data_.size() - pos_ < n) {
            failed_ = true;
            return false;
        }
        return true;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    bool failed_ = false;
};

// Shared body writer. `for_signing` zeroes ttl/hops_traversed and stops
// before the trailing signature.
void write_hello(Writer& w, const HelloPacket& p, bool for_signing) {
    w.u8(static_cast<std::uint8_t>(PacketType::Hello));
    w.mac(p.mac);
    w.ip(p.ip);
    if (!for_signing) w.signature(p.signature);
}

void write_lsu(Writer& w, const LsuPacket& p, bool for_signing) {
    if (p.links.size() > 0xffff)
        throw std::length_error("LSU link list exceeds 65535 entries");
    w.u8(static_cast<std::uint8_t>(PacketType::Lsu));
    w.ip(p.originator_ip);
    w.u32(p.seq);
    w.u8(p.r_lsu);
    w.u8(for_signing ? 0 : p.ttl);
    w.digest(p.zone_radius);
    if (for_signing)
        w.zero_digest();
    else
        w.digest(p.hops_traversed);
    w.u16(static_cast<std::uint16_t>(p.links.size()));
    for (const auto& link : p.links) w.ip(link);
    if (p.attached_key) {
        w.u8(1);
        w.public_key(p.attached_key->public_key);
        w.certificate(p.attached_key->certificate);
    } else {
        w.u8(0);
    }
    if (!for_signing) w.signature(p.signature);
}

void write_pkd(Writer& w, const PkdPacket& p, bool for_signing) {
    w.u8(static_cast<std::uint8_t>(PacketType::Pkd));
    w.ip(p.originator_ip);
    w.u32(p.seq);
    w.public_key(p.public_key);
    w.certificate(p.certificate);
    w.u8(p.r_pkd);
    w.u8(for_signing ? 0 : p.ttl);
    w.digest(p.zone_radius);
    if (for_signing)
        w.zero_digest();
    else
        w.digest(p.hops_traversed);
    if (!for_signing) w.signature(p.signature);
}

std::vector<std::uint8_t> render(const Packet& packet, bool for_signing) {
    Writer w;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HelloPacket>)
                write_hello(w, p, for_signing);
            else if constexpr (std::is_same_v<T, LsuPacket>)
                write_lsu(w, p, for_signing);
            else
                write_pkd(w, p, for_signing);
        },
        packet);
    return w.take();
}

}  // namespace

PacketType type_of(const Packet& packet) {
    return std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HelloPacket>)
                return PacketType::Hello;
            else if constexpr (std::is_same_v<T, LsuPacket>)
                return PacketType::Lsu;
            else
                return PacketType::Pkd;
        },
        packet);
}

const char* to_string(DecodeError err) {
    switch (err) {
        case DecodeError::Truncated: return "truncated";
        case DecodeError::UnknownType: return "unknown_type";
        case DecodeError::TrailingGarbage: return "trailing_garbage";
    }
    return "?";
}

std::vector<std::uint8_t> encode(const Packet& packet) { return render(packet, false); }

std::vector<std::uint8_t> signable_bytes(const Packet& packet) { return render(packet, true); }

std::variant<Packet, DecodeError> decode(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const std::uint8_t tag = r.u8();
    if (r.truncated()) return DecodeError::Truncated;

    Packet packet;
    switch (static_cast<PacketType>(tag)) {
        case PacketType::Hello: {
            HelloPacket p;
            p.mac = r.mac();
            p.ip = r.ip();
            p.signature = r.signature();
            packet = std::move(p);
            break;
        }
        case PacketType::Lsu: {
            LsuPacket p;
            p.originator_ip = r.ip();
            p.seq = r.u32();
            p.r_lsu = r.u8();
            p.ttl = r.u8();
            p.zone_radius = r.digest();
            p.hops_traversed = r.digest();
            const std::uint16_t count = r.u16();
            p.links.reserve(count);
            for (std::uint16_t i = 0; i < count && !r.truncated(); ++i) p.links.push_back(r.ip());
            if (r.u8() != 0) {
                AttachedKey key;
                key.public_key = r.public_key();
                key.certificate = r.certificate();
                p.attached_key = std::move(key);
            }
            p.signature = r.signature();
            packet = std::move(p);
            break;
        }
        case PacketType::Pkd: {
            PkdPacket p;
            p.originator_ip = r.ip();
            p.seq = r.u32();
            p.public_key = r.public_key();
            p.certificate = r.certificate();
            p.r_pkd = r.u8();
            p.ttl = r.u8();
            p.zone_radius = r.digest();
            p.hops_traversed = r.digest();
            p.signature = r.signature();
            packet = std::move(p);
            break;
        }
        default:
            return DecodeError::UnknownType;
    }

    if (r.truncated()) return DecodeError::Truncated;
    if (!r.exhausted()) return DecodeError::TrailingGarbage;
    return packet;
}

}  // namespace slsp::wire

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "slsp/types.hpp"

namespace slsp::crypto {

inline constexpr std::size_t kDigestSize = 32;

/// Fixed-length output of the one-way function H (SHA-256).
struct Digest {
    std::array<std::uint8_t, kDigestSize> bytes{};

    auto operator<=>(const Digest&) const = default;

    std::string hex() const;
    static Digest from_hex(const std::string& hex);
};

Digest hash(std::span<const std::uint8_t> data);
Digest hash(const Digest& d);
inline Digest hash_str(const std::string& s) {
    return hash(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

/// Applies H to `d` exactly `n` times.
Digest hash_iterate(const Digest& d, unsigned n);

/// X_i = H^i(X) for i = 1..radius. anchor is X_R, first_link is X_1.
struct HashChain {
    Digest seed;
    unsigned radius = 1;
    Digest anchor;
    Digest first_link;
};

/// Builds a hop-count chain from a random seed. radius must be >= 1.
HashChain make_chain(const Digest& seed, unsigned radius);

/// True iff H^remaining(hops_traversed) equals anchor. remaining == 0 is
/// plain byte equality.
bool verify_chain_link(const Digest& anchor, const Digest& hops_traversed,
                       unsigned remaining_applications);

Digest random_digest(DetRng& rng);

/// Public half E_V. key_id identifies the pair; tag is opaque padding so two
/// pairs never compare equal by id alone.
struct PublicKey {
    std::uint64_t key_id = 0;
    std::array<std::uint8_t, 8> tag{};

    auto operator<=>(const PublicKey&) const = default;
};

/// Private half D_V. Only the holder of this value can produce signatures
/// under the matching public key; the scheme provides no forging operation.
struct PrivateKey {
    std::uint64_t key_id = 0;
};

struct KeyPair {
    PublicKey public_key;
    PrivateKey private_key;

    std::uint64_t key_id() const { return private_key.key_id; }
};

struct Signature {
    Digest bytes;
    std::uint64_t signer_key_id = 0;

    auto operator<=>(const Signature&) const = default;
};

Signature sign(const PrivateKey& key, std::span<const std::uint8_t> message);
bool verify(const PublicKey& key, std::span<const std::uint8_t> message,
            const Signature& sig);

/// Binds one (ip, public key) pair under the simulation's trusted authority.
struct Certificate {
    IpAddress subject_ip;
    PublicKey subject_public_key;
    Signature authority_signature;

    auto operator<=>(const Certificate&) const = default;
};

/// Byte string an authority signs when issuing a certificate.
std::vector<std::uint8_t> certificate_claim(const IpAddress& ip, const PublicKey& key);

bool verify_certificate(const Certificate& cert, const PublicKey& authority_key);

/// Simulation-global certificate authority. Also hands out key pairs with
/// simulation-unique ids, which is what makes signatures structurally
/// unforgeable: a behavior only ever holds the private halves it was issued.
class TrustAuthority {
public:
    explicit TrustAuthority(std::uint64_t seed);

    const PublicKey& public_key() const { return pair_.public_key; }

    KeyPair new_keypair();
    Certificate issue(const IpAddress& ip, const PublicKey& subject) const;

private:
    DetRng rng_;
    std::uint64_t next_key_id_ = 1;
    KeyPair pair_;
};

}  // namespace slsp::crypto

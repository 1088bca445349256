#include "slsp/crypto.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace slsp::crypto {

namespace {

// One context per thread; EVP_DigestInit_ex resets it for every call.
EVP_MD_CTX* sha256_ctx() {
    thread_local EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    return ctx;
}

void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::string Digest::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(kDigestSize * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

Digest Digest::from_hex(const std::string& hex) {
    if (hex.size() != kDigestSize * 2)
        throw std::invalid_argument("digest hex must be 64 characters");
    auto nibble = [](char c) -> unsigned {
        if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
        throw std::invalid_argument("bad hex digit");
    };
    Digest d;
    for (std::size_t i = 0; i < kDigestSize; ++i)
        d.bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    return d;
}

Digest hash(std::span<const std::uint8_t> data) {
    Digest out;
    EVP_MD_CTX* ctx = sha256_ctx();
    unsigned int len = 0;
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, out.bytes.data(), &len) != 1 || len != kDigestSize)
        throw std::runtime_error("sha256 failed");
    return out;
}

Digest hash(const Digest& d) { return hash(std::span<const std::uint8_t>(d.bytes)); }

Digest hash_iterate(const Digest& d, unsigned n) {
    Digest cur = d;
    for (unsigned i = 0; i < n; ++i) cur = hash(cur);
    return cur;
}

HashChain make_chain(const Digest& seed, unsigned radius) {
    if (radius == 0)
        throw std::invalid_argument("hash chain radius must be >= 1");
    HashChain chain;
    chain.seed = seed;
    chain.radius = radius;
    chain.first_link = hash(seed);
    chain.anchor = hash_iterate(chain.first_link, radius - 1);
    return chain;
}

bool verify_chain_link(const Digest& anchor, const Digest& hops_traversed,
                       unsigned remaining_applications) {
    return hash_iterate(hops_traversed, remaining_applications) == anchor;
}

Digest random_digest(DetRng& rng) {
    Digest d;
    for (std::size_t i = 0; i < kDigestSize; i += 8) {
        std::uint64_t v = rng.next_u64();
        for (std::size_t j = 0; j < 8; ++j)
            d.bytes[i + j] = static_cast<std::uint8_t>((v >> (8 * j)) & 0xff);
    }
    return d;
}

Signature sign(const PrivateKey& key, std::span<const std::uint8_t> message) {
    std::vector<std::uint8_t> buf;
    buf.reserve(8 + message.size());
    put_u64_be(buf, key.key_id);
    buf.insert(buf.end(), message.begin(), message.end());
    return Signature{hash(buf), key.key_id};
}

bool verify(const PublicKey& key, std::span<const std::uint8_t> message,
            const Signature& sig) {
    if (sig.signer_key_id != key.key_id) return false;
    std::vector<std::uint8_t> buf;
    buf.reserve(8 + message.size());
    put_u64_be(buf, key.key_id);
    buf.insert(buf.end(), message.begin(), message.end());
    return hash(buf) == sig.bytes;
}

std::vector<std::uint8_t> certificate_claim(const IpAddress& ip, const PublicKey& key) {
    std::vector<std::uint8_t> buf;
    buf.reserve(4 + 16);
    for (int i = 3; i >= 0; --i)
        buf.push_back(static_cast<std::uint8_t>((ip.value >> (8 * i)) & 0xff));
    put_u64_be(buf, key.key_id);
    buf.insert(buf.end(), key.tag.begin(), key.tag.end());
    return buf;
}

bool verify_certificate(const Certificate& cert, const PublicKey& authority_key) {
    auto claim = certificate_claim(cert.subject_ip, cert.subject_public_key);
    return verify(authority_key, claim, cert.authority_signature);
}

TrustAuthority::TrustAuthority(std::uint64_t seed) : rng_(seed ^ 0xc2b2ae3d27d4eb4fULL) {
    pair_ = new_keypair();
}

KeyPair TrustAuthority::new_keypair() {
    KeyPair pair;
    pair.private_key.key_id = next_key_id_++;
    pair.public_key.key_id = pair.private_key.key_id;
    std::uint64_t tag = rng_.next_u64();
    for (std::size_t i = 0; i < 8; ++i)
        pair.public_key.tag[i] = static_cast<std::uint8_t>((tag >> (8 * i)) & 0xff);
    return pair;
}

Certificate TrustAuthority::issue(const IpAddress& ip, const PublicKey& subject) const {
    auto claim = certificate_claim(ip, subject);
    return Certificate{ip, subject, sign(pair_.private_key, claim)};
}

}  // namespace slsp::crypto

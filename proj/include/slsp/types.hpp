#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <random>
#include <string>

namespace slsp {

/// Simulated time in seconds.
using SimTime = double;

/// 48-bit hardware address.
struct MacAddress {
    std::array<std::uint8_t, 6> octets{};

    auto operator<=>(const MacAddress&) const = default;

    static MacAddress from_u64(std::uint64_t v) {
        MacAddress m;
        for (int i = 5; i >= 0; --i) {
            m.octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
            v >>= 8;
        }
        return m;
    }

    std::uint64_t to_u64() const {
        std::uint64_t v = 0;
        for (auto o : octets) v = (v << 8) | o;
        return v;
    }

    std::string to_string() const {
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (std::size_t i = 0; i < octets.size(); ++i) {
            if (i) out.push_back(':');
            out.push_back(digits[octets[i] >> 4]);
            out.push_back(digits[octets[i] & 0xf]);
        }
        return out;
    }
};

/// 32-bit network address, host byte order.
struct IpAddress {
    std::uint32_t value = 0;

    auto operator<=>(const IpAddress&) const = default;

    std::string to_string() const {
        std::string out;
        for (int i = 3; i >= 0; --i) {
            if (i != 3) out.push_back('.');
            out += std::to_string((value >> (8 * i)) & 0xff);
        }
        return out;
    }
};

/// Deterministic random stream. Wraps mt19937_64 but derives all variates
/// itself so output does not depend on the standard library's distribution
/// implementations.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, bound); bound 0 yields 0.
    std::uint32_t uniform_u32(std::uint32_t bound) {
        if (bound == 0) return 0;
        return static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(next_u64() >> 32)) * bound) >> 32);
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponentially distributed gap for a given event rate (events/second).
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

private:
    std::mt19937_64 engine_;
};

}  // namespace slsp

#ifndef HANDEL_SCHEME_HPP
#define HANDEL_SCHEME_HPP

// Contribution model and the deterministic reference aggregation scheme.
//
// A contribution is a participant bitset plus a fixed 64-byte payload (the
// size of a BN256 multi-signature). Aggregation is a partial function,
// defined exactly on pairs with disjoint bitsets; it is commutative and
// associative wherever defined, and weights add.
//
// The reference scheme stands in for pairing-based multi-signatures with a
// keyed-hash construction: participant i's "signature" is token(params, i),
// the first 64 bytes of a SHA-256 counter stream over
// ("handel/token", seed, message, i), and payload aggregation is byte-wise
// XOR. Validity (payload == XOR of tokens of all set bits) is exact and
// cheap to check, which the simulator and the test suites rely on; the cost
// of verification is modeled separately. A pairing-based backend can be
// added by implementing ContributionScheme.

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "handel/bitset.hpp"
#include "handel/digest.hpp"

namespace handel {

constexpr size_t kPayloadSize = 64;
using Payload = std::array<uint8_t, kPayloadSize>;

struct PublicParams {
    uint32_t n_participants = 0;
    Seed32 seed{};
    std::vector<uint8_t> message;

    PublicParams() = default;
    PublicParams(uint32_t n, const Seed32& s, std::vector<uint8_t> msg)
        : n_participants(n), seed(s), message(std::move(msg)) {
        if (n_participants < 1)
            throw std::invalid_argument("PublicParams: n_participants must be >= 1");
    }

    bool operator==(const PublicParams&) const = default;
};

struct Contribution {
    Bitset bits;
    Payload payload{};

    bool operator==(const Contribution&) const = default;
};

inline size_t weight(const Contribution& c) { return c.bits.count(); }

// Deterministic 64-byte stand-in for participant `id`'s individual signature.
inline Payload token(const PublicParams& params, uint32_t id) {
    if (id >= params.n_participants)
        throw std::invalid_argument("token: participant id out of range");
    return HashInput("handel/token")
        .bytes(params.seed)
        .u64(params.message.size())
        .bytes(params.message)
        .u32(id)
        .stream64();
}

inline bool aggregable(const Contribution& c1, const Contribution& c2) {
    return c1.bits.disjoint(c2.bits);
}

class ContributionScheme {
public:
    virtual ~ContributionScheme() = default;

    virtual const PublicParams& params() const = 0;
    virtual Contribution individual(uint32_t id) const = 0;
    virtual bool verify(const Contribution& c) const = 0;
    // Payload half of aggregation (curve addition in BLS, XOR here).
    virtual Payload combine(const Payload& a, const Payload& b) const = 0;

    // Partial: throws std::domain_error unless the bitsets are disjoint.
    Contribution aggregate(const Contribution& c1, const Contribution& c2) const {
        if (!aggregable(c1, c2))
            throw std::domain_error("aggregate: contributions are not aggregable");
        return Contribution{c1.bits.united(c2.bits), combine(c1.payload, c2.payload)};
    }
};

class XorTokenScheme final : public ContributionScheme {
public:
    explicit XorTokenScheme(PublicParams params) : params_(std::move(params)) {
        tokens_.reserve(params_.n_participants);
        for (uint32_t id = 0; id < params_.n_participants; ++id)
            tokens_.push_back(token(params_, id));
    }

    const PublicParams& params() const override { return params_; }

    Contribution individual(uint32_t id) const override {
        if (id >= params_.n_participants)
            throw std::invalid_argument("individual: participant id out of range");
        return Contribution{Bitset::single(params_.n_participants, id), tokens_[id]};
    }

    bool verify(const Contribution& c) const override {
        if (c.bits.size() != params_.n_participants || !c.bits.any()) return false;
        Payload expected{};
        c.bits.for_each_set([&](size_t id) {
            const Payload& t = tokens_[id];
            for (size_t i = 0; i < kPayloadSize; ++i) expected[i] ^= t[i];
        });
        return expected == c.payload;
    }

    Payload combine(const Payload& a, const Payload& b) const override {
        Payload out;
        for (size_t i = 0; i < kPayloadSize; ++i) out[i] = a[i] ^ b[i];
        return out;
    }

private:
    PublicParams params_;
    std::vector<Payload> tokens_;
};

// Canonical contribution encoding: 2-byte little-endian bit count, bitset
// packed little-endian within bytes (bit i at byte i/8, position i%8), then
// the 64 payload bytes.
inline void encode_bits_into(const Bitset& bits, size_t first, size_t count,
                             std::vector<uint8_t>& out) {
    const size_t start = out.size();
    out.resize(start + (count + 7) / 8, 0);
    for (size_t k = 0; k < count; ++k)
        if (bits.test(first + k)) out[start + k / 8] |= static_cast<uint8_t>(1u << (k % 8));
}

inline std::vector<uint8_t> encode_contribution(const Contribution& c) {
    const size_t n = c.bits.size();
    if (n > 0xffff) throw std::invalid_argument("encode_contribution: bitset too long");
    std::vector<uint8_t> out;
    out.reserve(2 + (n + 7) / 8 + kPayloadSize);
    out.push_back(static_cast<uint8_t>(n & 0xff));
    out.push_back(static_cast<uint8_t>(n >> 8));
    encode_bits_into(c.bits, 0, n, out);
    out.insert(out.end(), c.payload.begin(), c.payload.end());
    return out;
}

inline std::optional<Contribution> decode_contribution(const std::vector<uint8_t>& buf) {
    if (buf.size() < 2) return std::nullopt;
    const size_t n = static_cast<size_t>(buf[0]) | (static_cast<size_t>(buf[1]) << 8);
    const size_t expected = 2 + (n + 7) / 8 + kPayloadSize;
    if (buf.size() != expected) return std::nullopt;
    Contribution c{Bitset(n), {}};
    for (size_t k = 0; k < n; ++k)
        if ((buf[2 + k / 8] >> (k % 8)) & 1u) c.bits.set(k);
    if (!c.bits.any()) return std::nullopt;
    std::copy(buf.end() - static_cast<long>(kPayloadSize), buf.end(), c.payload.begin());
    return c;
}

} // namespace handel

#endif

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "handel/scheme.hpp"

using namespace handel;

namespace {

Seed32 make_seed(uint8_t fill) {
    Seed32 s{};
    s.fill(fill);
    return s;
}

PublicParams params16() {
    return PublicParams(16, make_seed(0), {'h', 'a', 'n', 'd', 'e', 'l'});
}

// Random valid contribution over a random bit subset.
Contribution random_valid(const XorTokenScheme& scheme, std::mt19937& gen) {
    const uint32_t n = scheme.params().n_participants;
    Contribution c;
    bool first = true;
    for (uint32_t id = 0; id < n; ++id) {
        if (gen() % 2) {
            c = first ? scheme.individual(id) : scheme.aggregate(c, scheme.individual(id));
            first = false;
        }
    }
    if (first) c = scheme.individual(gen() % n);
    return c;
}

} // namespace

TEST_CASE("token is deterministic and input-sensitive") {
    const PublicParams p = params16();
    CHECK(token(p, 0) == token(p, 0));

    // Pinned prefix from an independent reference of the construction.
    const Payload t0 = token(p, 0);
    const std::array<uint8_t, 8> expected{0x15, 0x87, 0x8d, 0x40, 0x7e, 0x0b, 0x10, 0xc4};
    CHECK(std::equal(expected.begin(), expected.end(), t0.begin()));

    const PublicParams other(16, make_seed(1), p.message);
    CHECK(token(p, 0) != token(other, 0));
    CHECK(token(p, 0) != token(p, 1));

    CHECK_THROWS_AS(token(p, 16), std::invalid_argument);
}

TEST_CASE("aggregable is bitset disjointness") {
    const uint32_t n = 16;
    Contribution a{Bitset::single(n, 0), {}};
    Contribution b{Bitset::single(n, 1), {}};
    CHECK(aggregable(a, b));

    Contribution c{Bitset(n), {}};
    c.bits.set(0);
    c.bits.set(1);
    Contribution d{Bitset(n), {}};
    d.bits.set(1);
    d.bits.set(2);
    CHECK_FALSE(aggregable(c, d));

    Contribution full{Bitset::full(n), {}};
    CHECK_FALSE(aggregable(full, a));

    Contribution wrong{Bitset::single(8, 0), {}};
    CHECK_THROWS_AS(aggregable(a, wrong), std::invalid_argument);
}

TEST_CASE("aggregate unions bitsets, XORs payloads, adds weights") {
    const XorTokenScheme scheme(params16());
    const Contribution c0 = scheme.individual(0);
    const Contribution c1 = scheme.individual(1);

    const Contribution sum = scheme.aggregate(c0, c1);
    CHECK(weight(sum) == 2);
    CHECK(sum == scheme.aggregate(c1, c0));

    // Payload equals the XOR of the two tokens, recomputed directly.
    const Payload t0 = token(scheme.params(), 0);
    const Payload t1 = token(scheme.params(), 1);
    for (size_t i = 0; i < kPayloadSize; ++i) CHECK(sum.payload[i] == (t0[i] ^ t1[i]));

    CHECK_THROWS_AS(scheme.aggregate(sum, c1), std::domain_error);
}

TEST_CASE("verify accepts construction and rejects tampering") {
    const XorTokenScheme scheme(params16());
    const Contribution ind = scheme.individual(3);
    CHECK(scheme.verify(ind));

    Contribution tampered = ind;
    tampered.payload[17] ^= 0x01;
    CHECK_FALSE(scheme.verify(tampered));

    const Contribution agg = scheme.aggregate(scheme.individual(2), scheme.individual(9));
    CHECK(scheme.verify(agg));
}

TEST_CASE("verify rejects any single-byte payload corruption") {
    const XorTokenScheme scheme(params16());
    std::mt19937 gen(7);
    const Contribution c = random_valid(scheme, gen);
    REQUIRE(scheme.verify(c));
    for (size_t i = 0; i < kPayloadSize; ++i) {
        Contribution bad = c;
        bad.payload[i] ^= 0xa5;
        CHECK_FALSE(scheme.verify(bad));
    }
}

TEST_CASE("weight is the population count") {
    const uint32_t n = 16;
    CHECK(weight(Contribution{Bitset::single(n, 4), {}}) == 1);
    CHECK(weight(Contribution{Bitset::full(n), {}}) == 16);
    Contribution c{Bitset(n), {}};
    c.bits.set(0);
    c.bits.set(3);
    c.bits.set(7);
    CHECK(weight(c) == 3);
}

TEST_CASE("aggregation laws on random disjoint triples") {
    const XorTokenScheme scheme(params16());
    std::mt19937 gen(42);
    for (int trial = 0; trial < 200; ++trial) {
        // Three disjoint contributions from a random 3-coloring of the ids.
        Contribution parts[3];
        bool seen[3] = {false, false, false};
        for (uint32_t id = 0; id < 16; ++id) {
            const uint32_t bucket = gen() % 4;
            if (bucket == 3) continue;
            const Contribution ind = scheme.individual(id);
            parts[bucket] = seen[bucket] ? scheme.aggregate(parts[bucket], ind) : ind;
            seen[bucket] = true;
        }
        if (!(seen[0] && seen[1] && seen[2])) continue;
        const Contribution ab_c = scheme.aggregate(scheme.aggregate(parts[0], parts[1]), parts[2]);
        const Contribution a_bc = scheme.aggregate(parts[0], scheme.aggregate(parts[1], parts[2]));
        CHECK(ab_c == a_bc);
        CHECK(scheme.aggregate(parts[0], parts[1]) == scheme.aggregate(parts[1], parts[0]));
        CHECK(weight(ab_c) == weight(parts[0]) + weight(parts[1]) + weight(parts[2]));
        CHECK(scheme.verify(ab_c));
    }
}

TEST_CASE("a valid aggregate holds each individual at most once") {
    // Structural: aggregation is only defined on disjoint bitsets, so the
    // union can never double-count. Weight additivity is the witness.
    const XorTokenScheme scheme(params16());
    const Contribution a = scheme.aggregate(scheme.individual(0), scheme.individual(5));
    CHECK_THROWS_AS(scheme.aggregate(a, scheme.individual(5)), std::domain_error);
}

TEST_CASE("canonical contribution encoding round-trips") {
    const XorTokenScheme scheme(params16());
    std::mt19937 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Contribution c = random_valid(scheme, gen);
        const std::vector<uint8_t> bytes = encode_contribution(c);
        CHECK(bytes.size() == 2 + 2 + 64); // 16 bits -> 2 packed bytes
        CHECK(bytes[0] == 16);
        CHECK(bytes[1] == 0);
        const auto back = decode_contribution(bytes);
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }

    // Bit 0 of participant 0 lands in byte 0, position 0.
    Contribution c{Bitset::single(16, 0), {}};
    c.payload.fill(0xee);
    const std::vector<uint8_t> bytes = encode_contribution(c);
    CHECK(bytes[2] == 0x01);
    CHECK(bytes[3] == 0x00);
    CHECK(bytes[4] == 0xee);

    CHECK_FALSE(decode_contribution({0x10}).has_value());                  // truncated
    std::vector<uint8_t> padded = encode_contribution(c);
    padded.push_back(0);
    CHECK_FALSE(decode_contribution(padded).has_value());                  // over-length
    std::vector<uint8_t> empty_bits = encode_contribution(c);
    empty_bits[2] = 0;
    CHECK_FALSE(decode_contribution(empty_bits).has_value());              // all-zero bitset
}

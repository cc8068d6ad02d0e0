#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "handel/wire.hpp"

using namespace handel;

TEST_CASE("encode layout matches a hand-built buffer") {
    const uint32_t n = 16;
    Message msg;
    msg.sender = 5;
    msg.level = 3; // own range of 5 at level 3 is [4, 8)
    msg.no_contact = true;
    msg.aggregate.bits = Bitset(n);
    msg.aggregate.bits.set(4);
    msg.aggregate.bits.set(7);
    msg.aggregate.payload.fill(0xaa);
    msg.individual.bits = Bitset::single(n, 5);
    msg.individual.payload.fill(0xbb);

    std::vector<uint8_t> expected;
    expected.insert(expected.end(), {0x05, 0x00, 0x00, 0x00}); // sender
    expected.push_back(0x03);                                  // level
    expected.push_back(0x01);                                  // flag
    expected.insert(expected.end(), {0x04, 0x00});             // bit count 4
    expected.push_back(0x09); // bits 4 and 7 -> offsets 0 and 3 -> 0b1001
    expected.insert(expected.end(), 64, 0xaa);
    expected.insert(expected.end(), {0x05, 0x00, 0x00, 0x00}); // individual position
    expected.insert(expected.end(), 64, 0xbb);

    CHECK(encode_message(msg, n) == expected);
    CHECK(encoded_message_size(5, 3, n) == expected.size());
}

TEST_CASE("top-level message size for 4000 participants") {
    const uint32_t n = 4000;
    const uint32_t level = num_levels(n);
    REQUIRE(level == 12);
    // Lower half: 2048-bit own range; upper half: clipped to 1952 bits.
    CHECK(encoded_message_size(1337, level, n) == 4 + 1 + 1 + 2 + 256 + 64 + 4 + 64);
    CHECK(encoded_message_size(3000, level, n) == 4 + 1 + 1 + 2 + 244 + 64 + 4 + 64);
    CHECK(encoded_message_size(1337, level, n) <= 410);
    CHECK(encoded_message_size(3000, level, n) <= 410);
}

TEST_CASE("round-trip identity on random messages") {
    const uint32_t n = 100;
    std::mt19937 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const uint32_t sender = gen() % n;
        const uint32_t level = 1 + gen() % num_levels(n);
        const IdRange own = own_range(sender, level, n);
        Message msg;
        msg.sender = sender;
        msg.level = level;
        msg.no_contact = gen() % 2;
        msg.aggregate.bits = Bitset(n);
        msg.aggregate.bits.set(sender);
        for (uint32_t id = own.first; id < own.first + own.size; ++id)
            if (gen() % 2) msg.aggregate.bits.set(id);
        for (auto& b : msg.aggregate.payload) b = static_cast<uint8_t>(gen());
        msg.individual.bits = Bitset::single(n, sender);
        for (auto& b : msg.individual.payload) b = static_cast<uint8_t>(gen());

        const std::vector<uint8_t> bytes = encode_message(msg, n);
        CHECK(bytes.size() == encoded_message_size(sender, level, n));
        const auto back = decode_message(bytes, n);
        REQUIRE(back.has_value());
        CHECK(*back == msg);
    }
}

TEST_CASE("decode rejects malformed buffers") {
    const uint32_t n = 16;
    Message msg;
    msg.sender = 5;
    msg.level = 2;
    msg.aggregate.bits = Bitset::single(n, 4);
    msg.individual.bits = Bitset::single(n, 5);
    const std::vector<uint8_t> good = encode_message(msg, n);
    REQUIRE(decode_message(good, n).has_value());

    std::vector<uint8_t> level_zero = good;
    level_zero[4] = 0;
    CHECK_FALSE(decode_message(level_zero, n).has_value());

    std::vector<uint8_t> level_big = good;
    level_big[4] = 5;
    CHECK_FALSE(decode_message(level_big, n).has_value());

    std::vector<uint8_t> truncated(good.begin(), good.end() - 1);
    CHECK_FALSE(decode_message(truncated, n).has_value());

    std::vector<uint8_t> padded = good;
    padded.push_back(0);
    CHECK_FALSE(decode_message(padded, n).has_value());

    std::vector<uint8_t> wrong_bits = good;
    wrong_bits[6] = 3; // level-2 own range of node 5 has 2 bits
    CHECK_FALSE(decode_message(wrong_bits, n).has_value());

    std::vector<uint8_t> bad_position = good;
    bad_position[8 + 1 + 64] = 6; // individual position != sender
    CHECK_FALSE(decode_message(bad_position, n).has_value());

    CHECK_FALSE(decode_message({}, n).has_value());
}

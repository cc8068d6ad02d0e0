#ifndef HANDEL_WIRE_HPP
#define HANDEL_WIRE_HPP

// The single protocol message and its canonical byte layout.
//
//   offset  size  field
//   0       4     sender id, little-endian
//   4       1     level (>= 1)
//   5       1     no-contact flag (0 or 1)
//   6       2     aggregate bit count, little-endian
//   8       B     aggregate bitset over the sender's own-side id range for
//                 the level, packed little-endian within bytes, B = ceil(bits/8)
//   8+B     64    aggregate payload
//   72+B    4     individual position (the sender id), little-endian
//   76+B    64    individual payload
//
// The aggregate travels as a slice over the sender's own-side range; the
// decoder re-expands it to a full-length bitset. For n = 4000 the top-level
// message is 396 bytes (lower half) or 384 bytes (upper half).

#include <cstdint>
#include <optional>
#include <vector>

#include "handel/overlay.hpp"
#include "handel/scheme.hpp"

namespace handel {

struct Message {
    uint32_t sender = 0;
    uint32_t level = 0;
    bool no_contact = false;
    Contribution aggregate;  // sender's out_level
    Contribution individual; // sender's inc_0

    bool operator==(const Message&) const = default;
};

inline size_t encoded_message_size(uint32_t sender, uint32_t level, uint32_t n) {
    const IdRange range = own_range(sender, level, n);
    return 4 + 1 + 1 + 2 + (range.size + 7) / 8 + kPayloadSize + 4 + kPayloadSize;
}

inline std::vector<uint8_t> encode_message(const Message& msg, uint32_t n) {
    const uint32_t levels = num_levels(n);
    if (msg.level < 1 || msg.level > levels)
        throw std::invalid_argument("encode_message: level out of range");
    if (msg.sender >= n) throw std::invalid_argument("encode_message: sender out of range");
    if (msg.aggregate.bits.size() != n || msg.individual.bits.size() != n)
        throw std::invalid_argument("encode_message: bitset length mismatch");
    const IdRange range = own_range(msg.sender, msg.level, n);

    std::vector<uint8_t> out;
    out.reserve(encoded_message_size(msg.sender, msg.level, n));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(msg.sender >> (8 * i)));
    out.push_back(static_cast<uint8_t>(msg.level));
    out.push_back(msg.no_contact ? 1 : 0);
    out.push_back(static_cast<uint8_t>(range.size & 0xff));
    out.push_back(static_cast<uint8_t>(range.size >> 8));
    encode_bits_into(msg.aggregate.bits, range.first, range.size, out);
    out.insert(out.end(), msg.aggregate.payload.begin(), msg.aggregate.payload.end());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(msg.sender >> (8 * i)));
    out.insert(out.end(), msg.individual.payload.begin(), msg.individual.payload.end());
    return out;
}

// Strict decoder: rejects truncated or over-length buffers, level 0 or out
// of range, bit counts that do not match the sender's own-side range, empty
// aggregates, and individual positions other than the sender.
inline std::optional<Message> decode_message(const std::vector<uint8_t>& buf, uint32_t n) {
    const uint32_t levels = num_levels(n);
    if (buf.size() < 8) return std::nullopt;
    uint32_t sender = 0;
    for (int i = 0; i < 4; ++i) sender |= static_cast<uint32_t>(buf[i]) << (8 * i);
    const uint32_t level = buf[4];
    const uint8_t flag = buf[5];
    if (sender >= n || level < 1 || level > levels || flag > 1) return std::nullopt;
    const uint32_t bit_count = static_cast<uint32_t>(buf[6]) | (static_cast<uint32_t>(buf[7]) << 8);
    const IdRange range = own_range(sender, level, n);
    if (bit_count != range.size) return std::nullopt;
    const size_t packed = (bit_count + 7) / 8;
    if (buf.size() != 8 + packed + kPayloadSize + 4 + kPayloadSize) return std::nullopt;

    Message msg;
    msg.sender = sender;
    msg.level = level;
    msg.no_contact = flag == 1;
    msg.aggregate.bits = Bitset(n);
    for (uint32_t k = 0; k < bit_count; ++k)
        if ((buf[8 + k / 8] >> (k % 8)) & 1u) msg.aggregate.bits.set(range.first + k);
    if (!msg.aggregate.bits.any()) return std::nullopt;
    size_t pos = 8 + packed;
    std::copy(buf.begin() + static_cast<long>(pos),
              buf.begin() + static_cast<long>(pos + kPayloadSize), msg.aggregate.payload.begin());
    pos += kPayloadSize;
    uint32_t ind_pos = 0;
    for (int i = 0; i < 4; ++i) ind_pos |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
    if (ind_pos != sender) return std::nullopt;
    pos += 4;
    msg.individual.bits = Bitset::single(n, sender);
    std::copy(buf.begin() + static_cast<long>(pos),
              buf.begin() + static_cast<long>(pos + kPayloadSize), msg.individual.payload.begin());
    return msg;
}

} // namespace handel

#endif

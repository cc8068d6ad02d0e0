#ifndef HANDEL_DIGEST_HPP
#define HANDEL_DIGEST_HPP

// SHA-256 backed derivation of every pseudo-random value in the library:
// scheme tokens, shuffle seeds, ranking seeds, per-run and per-node RNG
// seeds. All derivations are domain-separated by a NUL-terminated label and
// use fixed-width little-endian field encodings, so byte streams are stable
// across platforms and releases.

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace handel {

using Seed32 = std::array<uint8_t, 32>;
using Digest32 = std::array<uint8_t, 32>;

inline Digest32 sha256(const uint8_t* data, size_t len) {
    Digest32 out{};
    unsigned int out_len = 0;
    if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
        out_len != out.size()) {
        throw std::runtime_error("sha256: digest computation failed");
    }
    return out;
}

// Append-only input buffer for domain-separated hashing.
class HashInput {
public:
    explicit HashInput(std::string_view label) {
        buf_.insert(buf_.end(), label.begin(), label.end());
        buf_.push_back(0);
    }

    HashInput& bytes(const uint8_t* data, size_t len) {
        buf_.insert(buf_.end(), data, data + len);
        return *this;
    }

    template <size_t N>
    HashInput& bytes(const std::array<uint8_t, N>& a) {
        return bytes(a.data(), a.size());
    }

    HashInput& bytes(const std::vector<uint8_t>& v) { return bytes(v.data(), v.size()); }

    HashInput& u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
        return *this;
    }

    HashInput& u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
        return *this;
    }

    Digest32 digest() const { return sha256(buf_.data(), buf_.size()); }

    // Digest of the buffer extended with a little-endian block counter;
    // the building block of the counter-mode streams below.
    Digest32 digest_block(uint32_t counter) const {
        std::vector<uint8_t> tmp = buf_;
        for (int i = 0; i < 4; ++i) tmp.push_back(static_cast<uint8_t>(counter >> (8 * i)));
        return sha256(tmp.data(), tmp.size());
    }

    // First 64 bytes of the counter-mode stream (blocks 0 and 1).
    std::array<uint8_t, 64> stream64() const {
        std::array<uint8_t, 64> out{};
        const Digest32 b0 = digest_block(0);
        const Digest32 b1 = digest_block(1);
        std::memcpy(out.data(), b0.data(), 32);
        std::memcpy(out.data() + 32, b1.data(), 32);
        return out;
    }

    // First 8 digest bytes as a little-endian 64-bit seed.
    uint64_t seed64() const {
        const Digest32 d = digest();
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(d[i]) << (8 * i);
        return v;
    }

private:
    std::vector<uint8_t> buf_;
};

} // namespace handel

#endif

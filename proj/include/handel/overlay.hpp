#ifndef HANDEL_OVERLAY_HPP
#define HANDEL_OVERLAY_HPP

// Binary-tree overlay: id shuffling and per-level peer sets.
//
// Nodes are the leaves of a virtual binary tree over 2^L slots,
// L = ceil(log2 n). At level l >= 1, node i's peer set is the sibling half
// of the full height-l subtree containing i: the contiguous block of
// 2^(l-1) slots obtained by flipping bit l-1 of i's slot prefix. For
// non-power-of-two n the virtual tree is clipped to [0, n), so peer sets
// may be smaller than 2^(l-1) or empty; completeness everywhere counts
// actual members.

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "handel/digest.hpp"
#include "handel/random.hpp"

namespace handel {

inline uint32_t num_levels(uint32_t n) {
    if (n < 1) throw std::invalid_argument("num_levels: n must be >= 1");
    if (n == 1) return 0;
    return static_cast<uint32_t>(std::bit_width(n - 1));
}

// Contiguous id interval [first, first + size).
struct IdRange {
    uint32_t first = 0;
    uint32_t size = 0;

    bool contains(uint32_t id) const { return id >= first && id < first + size; }
    bool empty() const { return size == 0; }

    std::vector<uint32_t> members() const {
        std::vector<uint32_t> out;
        out.reserve(size);
        for (uint32_t id = first; id < first + size; ++id) out.push_back(id);
        return out;
    }

    bool operator==(const IdRange&) const = default;
};

namespace detail {
inline IdRange clip(uint64_t first, uint64_t width, uint32_t n) {
    const uint64_t lo = first < n ? first : n;
    const uint64_t hi = first + width < n ? first + width : n;
    return IdRange{static_cast<uint32_t>(lo), static_cast<uint32_t>(hi - lo)};
}
} // namespace detail

// Sibling half-block of node i at level `level` (>= 1), clipped to [0, n).
inline IdRange peer_range(uint32_t i, uint32_t level, uint32_t n) {
    const uint32_t levels = num_levels(n);
    if (i >= n) throw std::invalid_argument("peer_range: id out of range");
    if (level < 1 || level > levels) throw std::invalid_argument("peer_range: level out of range");
    const uint32_t shift = level - 1;
    const uint64_t first = (static_cast<uint64_t>((i >> shift) ^ 1u)) << shift;
    return detail::clip(first, uint64_t{1} << shift, n);
}

// Own-side block of node i below level `level`: the height-(level-1)
// subtree containing i, i.e. the id span of out_level.
inline IdRange own_range(uint32_t i, uint32_t level, uint32_t n) {
    const uint32_t levels = num_levels(n);
    if (i >= n) throw std::invalid_argument("own_range: id out of range");
    if (level < 1 || level > levels + 1) throw std::invalid_argument("own_range: level out of range");
    const uint32_t shift = level - 1;
    const uint64_t first = (static_cast<uint64_t>(i) >> shift) << shift;
    return detail::clip(first, uint64_t{1} << shift, n);
}

inline std::vector<uint32_t> peer_set(uint32_t i, uint32_t level, uint32_t n) {
    if (i >= n) throw std::invalid_argument("peer_set: id out of range");
    if (level == 0) return {i};
    return peer_range(i, level, n).members();
}

// Seeded Fisher-Yates permutation of [0, n). perm[original] = shuffled id.
inline std::vector<uint32_t> shuffle_ids(uint32_t n, const Seed32& seed) {
    if (n < 1) throw std::invalid_argument("shuffle_ids: n must be >= 1");
    std::vector<uint32_t> perm(n);
    for (uint32_t i = 0; i < n; ++i) perm[i] = i;
    DetRng rng(HashInput("handel/shuffle").bytes(seed).u32(n).seed64());
    fisher_yates(perm, rng);
    return perm;
}

struct Roster {
    uint32_t n = 0;
    Seed32 seed{};
    std::vector<uint32_t> id_of; // original index -> shuffled id
    uint32_t levels = 0;

    static Roster make(uint32_t n, const Seed32& seed) {
        return Roster{n, seed, shuffle_ids(n, seed), num_levels(n)};
    }

    bool operator==(const Roster&) const = default;
};

} // namespace handel

#endif

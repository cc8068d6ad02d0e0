#ifndef HANDEL_RANKING_HPP
#define HANDEL_RANKING_HPP

// Verification Priorities, Contribution Prioritization Vectors, contribution
// scoring and the adaptive verification window.
//
// VP_owner at a level is a seeded shuffle of that level's peer set; rank 0
// is the highest priority. A node's CPV at a level lists the peers sorted by
// the rank those peers give the node (ties broken by smaller peer id), i.e.
// the peers that want to hear from it soonest come first.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "handel/digest.hpp"
#include "handel/overlay.hpp"
#include "handel/random.hpp"
#include "handel/scheme.hpp"

namespace handel {

constexpr uint32_t kMaxWindow = 128;
constexpr uint32_t kWindowGrowthFactor = 2;
constexpr uint32_t kWindowContractionFactor = 4;

struct Window {
    uint32_t size = 16;

    bool operator==(const Window&) const = default;
};

inline Window update_window(Window w, bool verification_ok) {
    if (verification_ok) return Window{std::min(w.size * kWindowGrowthFactor, kMaxWindow)};
    return Window{std::max(w.size / kWindowContractionFactor, 1u)};
}

struct VpOrder {
    uint32_t owner = 0;
    uint32_t level = 0;
    std::vector<uint32_t> peers;   // the input peer list
    std::vector<uint32_t> ranks;   // ranks[k] = rank of peers[k]

    uint32_t rank_of(uint32_t peer) const {
        for (size_t k = 0; k < peers.size(); ++k)
            if (peers[k] == peer) return ranks[k];
        throw std::invalid_argument("VpOrder::rank_of: not a peer");
    }

    bool operator==(const VpOrder&) const = default;
};

inline VpOrder vp_order(const Seed32& seed, uint32_t owner, uint32_t level,
                        const std::vector<uint32_t>& peers) {
    if (peers.empty()) throw std::invalid_argument("vp_order: empty peer set");
    std::vector<uint32_t> by_rank = peers;
    DetRng rng(HashInput("handel/vp").bytes(seed).u32(owner).u32(level).seed64());
    fisher_yates(by_rank, rng);
    VpOrder out{owner, level, peers, std::vector<uint32_t>(peers.size(), 0)};
    for (uint32_t r = 0; r < by_rank.size(); ++r) {
        for (size_t k = 0; k < peers.size(); ++k)
            if (peers[k] == by_rank[r]) out.ranks[k] = r;
    }
    return out;
}

struct CpvOrder {
    uint32_t owner = 0;
    uint32_t level = 0;
    std::vector<uint32_t> contact_order;

    bool operator==(const CpvOrder&) const = default;
};

inline CpvOrder cpv_order(const Seed32& seed, uint32_t owner, uint32_t level,
                          const std::vector<uint32_t>& peers, uint32_t n) {
    if (peers.empty()) throw std::invalid_argument("cpv_order: empty peer set");
    std::vector<std::pair<uint32_t, uint32_t>> keyed; // (rank peer gives owner, peer)
    keyed.reserve(peers.size());
    for (uint32_t peer : peers) {
        const VpOrder vp = vp_order(seed, peer, level, peer_set(peer, level, n));
        keyed.emplace_back(vp.rank_of(owner), peer);
    }
    std::sort(keyed.begin(), keyed.end());
    CpvOrder out{owner, level, {}};
    out.contact_order.reserve(keyed.size());
    for (const auto& [rank, peer] : keyed) out.contact_order.push_back(peer);
    return out;
}

// Eagerly computed VP ranks for every (judge, level) pair of a roster.
// Shared by all nodes of a simulation run; a judge's peer sets are
// contiguous id ranges, so ranks are stored by offset within the range.
class PeerRanking {
public:
    explicit PeerRanking(const Roster& roster) : n_(roster.n), levels_(roster.levels) {
        ranks_.resize(static_cast<size_t>(n_) * levels_);
        for (uint32_t judge = 0; judge < n_; ++judge) {
            for (uint32_t level = 1; level <= levels_; ++level) {
                const IdRange range = peer_range(judge, level, n_);
                if (range.empty()) continue;
                const VpOrder vp = vp_order(roster.seed, judge, level, range.members());
                ranks_[slot(judge, level)] = vp.ranks;
            }
        }
    }

    // Rank that `judge` assigns to `target` within its level-`level` peers.
    uint32_t rank(uint32_t judge, uint32_t level, uint32_t target) const {
        const IdRange range = peer_range(judge, level, n_);
        if (!range.contains(target))
            throw std::invalid_argument("PeerRanking::rank: target not a peer");
        return ranks_[slot(judge, level)][target - range.first];
    }

    const std::vector<uint32_t>& ranks_by_offset(uint32_t judge, uint32_t level) const {
        return ranks_[slot(judge, level)];
    }

private:
    size_t slot(uint32_t judge, uint32_t level) const {
        return static_cast<size_t>(judge) * levels_ + (level - 1);
    }

    uint32_t n_;
    uint32_t levels_;
    std::vector<std::vector<uint32_t>> ranks_;
};

// Score of a candidate aggregate against the current best incoming
// aggregate: the combined weight when the pair is aggregable, otherwise the
// weight the candidate reaches with every verified individual disjoint from
// it (best_inc is then out of the picture).
inline size_t score(const Contribution& candidate, const Contribution* best_inc,
                    std::span<const Contribution> verified_individuals) {
    if (best_inc == nullptr || aggregable(*best_inc, candidate))
        return weight(candidate) + (best_inc ? weight(*best_inc) : 0);
    size_t s = weight(candidate);
    for (const Contribution& ind : verified_individuals)
        if (aggregable(ind, candidate)) s += weight(ind);
    return s;
}

struct PendingItem {
    uint32_t sender = 0;
    Contribution contribution;

    bool operator==(const PendingItem&) const = default;
};

// Items whose sender rank falls in [v, v + window), v being the best
// (lowest) rank present among the pending senders.
inline std::vector<PendingItem> select_window(const std::vector<PendingItem>& pending,
                                              const VpOrder& vp, Window window) {
    if (pending.empty()) return {};
    uint32_t v = UINT32_MAX;
    for (const PendingItem& item : pending) v = std::min(v, vp.rank_of(item.sender));
    std::vector<PendingItem> out;
    for (const PendingItem& item : pending) {
        const uint32_t r = vp.rank_of(item.sender);
        if (r >= v && r - v < window.size) out.push_back(item);
    }
    return out;
}

} // namespace handel

#endif

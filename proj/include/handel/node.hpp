#ifndef HANDEL_NODE_HPP
#define HANDEL_NODE_HPP

// The Handel participant as a deterministic event-driven state machine.
//
// The node never verifies contributions itself: the driver (simulator or
// host application) asks for the best pending candidate via
// next_verification(), performs the verification wherever it wants (the
// reference deployment dedicates a single core to it), and feeds the result
// back through apply_verification(). All transitions are synchronous,
// single-writer, and pure functions of (state, event), so replaying an
// event log reproduces the exact final state.
//
// Verification results can legitimately arrive after the buffered entry
// they refer to was replaced by a heavier one or pruned; apply_verification
// still applies the result (verified knowledge is merged, failures
// blacklist the sender) and leaves the newer entry in place.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "handel/overlay.hpp"
#include "handel/ranking.hpp"
#include "handel/scheme.hpp"
#include "handel/wire.hpp"

namespace handel {

using TimeUs = int64_t;

struct NodeConfig {
    TimeUs dissemination_period_us = 20'000;
    uint32_t fast_path_peers = 10;
    TimeUs level_delay_us = 50'000;
    uint32_t threshold = 1; // individual contributions required for done
    uint32_t initial_window = 16;
    // Assert scheme validity of every stored aggregate (test builds).
    bool verify_on_aggregate = false;

    bool operator==(const NodeConfig&) const = default;
};

struct BufferedEntry {
    Contribution aggregate;
    Contribution individual;

    bool operator==(const BufferedEntry&) const = default;
};

struct VerificationItem {
    uint32_t level = 0;
    uint32_t sender = 0;
    Contribution aggregate;
    Contribution individual;
    // False when the individual is already known (verified earlier, covered
    // by inc, or identical to the aggregate); the driver then performs and
    // accounts a single verification instead of two.
    bool verify_individual = false;

    bool operator==(const VerificationItem&) const = default;
};

// A message together with its transport destination.
struct Outgoing {
    uint32_t to = 0;
    Message msg;

    bool operator==(const Outgoing&) const = default;
};

struct LevelState {
    IdRange peers;     // peer_range(id, level, n)
    IdRange own;       // own_range(id, level, n), the span of `out`
    Bitset peer_mask;  // full-length mask of `peers`
    std::vector<uint32_t> vp_rank; // my rank of peer, by offset in `peers`
    std::vector<uint32_t> cpv;     // contact order
    uint32_t cpv_cursor = 0;
    std::optional<Contribution> inc;
    Contribution out;
    std::map<uint32_t, BufferedEntry> unverified; // sender -> best entry
    TimeUs start_time_us = 0;
    Window window;
    std::map<uint32_t, Contribution> verified_individuals;
    Bitset verified_bits; // union of verified_individuals' bits
    bool fast_path_fired = false;

    bool inc_complete() const {
        return peers.size == 0 || (inc.has_value() && inc->bits.count() == peers.size);
    }
    bool out_complete() const { return out.bits.count() == own.size; }

    bool operator==(const LevelState&) const = default;
};

class NodeState {
public:
    static NodeState init(const Roster& roster, const NodeConfig& config,
                          const ContributionScheme& scheme, const PeerRanking& ranking,
                          uint32_t id, Contribution own_individual, TimeUs now) {
        if (config.threshold < 1 || config.threshold > roster.n)
            throw std::invalid_argument("NodeState: threshold out of range");
        if (own_individual.bits.size() != roster.n || weight(own_individual) != 1 ||
            !own_individual.bits.test(id) || !scheme.verify(own_individual))
            throw std::invalid_argument("NodeState: invalid own contribution");

        NodeState node;
        node.id_ = id;
        node.roster_ = &roster;
        node.scheme_ = &scheme;
        node.config_ = config;
        node.own_individual_ = std::move(own_individual);
        node.levels_.resize(roster.levels);
        for (uint32_t level = 1; level <= roster.levels; ++level) {
            LevelState& ls = node.levels_[level - 1];
            ls.peers = peer_range(id, level, roster.n);
            ls.own = own_range(id, level, roster.n);
            ls.peer_mask = Bitset(roster.n);
            for (uint32_t p = ls.peers.first; p < ls.peers.first + ls.peers.size; ++p)
                ls.peer_mask.set(p);
            ls.start_time_us = now + static_cast<TimeUs>(level - 1) * config.level_delay_us;
            ls.window = Window{config.initial_window};
            ls.verified_bits = Bitset(roster.n);
            if (!ls.peers.empty()) {
                ls.vp_rank = ranking.ranks_by_offset(id, level);
                std::vector<std::pair<uint32_t, uint32_t>> keyed;
                keyed.reserve(ls.peers.size);
                for (uint32_t p = ls.peers.first; p < ls.peers.first + ls.peers.size; ++p)
                    keyed.emplace_back(ranking.rank(p, level, id), p);
                std::sort(keyed.begin(), keyed.end());
                ls.cpv.reserve(keyed.size());
                for (const auto& [rank, p] : keyed) ls.cpv.push_back(p);
            }
        }
        node.refresh_outputs();
        // Levels whose out is already complete (always level 1, plus clipped
        // one-slot blocks) never "become" complete, so no burst for them.
        for (LevelState& ls : node.levels_)
            if (ls.out_complete()) ls.fast_path_fired = true;
        node.done_ = node.total_weight() >= config.threshold;
        return node;
    }

    // Buffers the sender's aggregate and individual under the pruning rules.
    // Returns false (state untouched) for structurally invalid messages.
    bool handle_message(const Message& msg, TimeUs /*now*/) {
        if (msg.level < 1 || msg.level > levels_.size()) return false;
        LevelState& ls = levels_[msg.level - 1];
        if (!ls.peers.contains(msg.sender)) return false;
        if (msg.aggregate.bits.size() != roster_->n || msg.individual.bits.size() != roster_->n)
            return false;
        if (weight(msg.individual) != 1 || !msg.individual.bits.test(msg.sender)) return false;
        if (!msg.aggregate.bits.any() || !ls.peer_mask.contains(msg.aggregate.bits)) return false;

        if (blacklist_.count(msg.sender)) return true; // dropped, rule 1
        if (msg.no_contact) no_contact_.insert(msg.sender);
        if (ls.inc_complete()) return true; // dropped, rule 2
        auto it = ls.unverified.find(msg.sender);
        if (it == ls.unverified.end() ||
            weight(msg.aggregate) > weight(it->second.aggregate)) // rule 4
            ls.unverified[msg.sender] = BufferedEntry{msg.aggregate, msg.individual};
        return true;
    }

    // Highest-scoring windowed candidate across all levels; ties go to the
    // lower sender VP rank, then the lower level. Redundant entries (not
    // aggregable with inc and scoring no higher) are pruned on the way.
    std::optional<VerificationItem> next_verification() {
        prune();
        bool found = false;
        size_t best_score = 0;
        uint32_t best_rank = 0;
        uint32_t best_level = 0;
        uint32_t best_sender = 0;
        for (uint32_t level = 1; level <= levels_.size(); ++level) {
            LevelState& ls = levels_[level - 1];
            if (ls.unverified.empty()) continue;
            uint32_t v = UINT32_MAX;
            for (const auto& [sender, entry] : ls.unverified)
                v = std::min(v, ls.vp_rank[sender - ls.peers.first]);
            for (const auto& [sender, entry] : ls.unverified) {
                const uint32_t r = ls.vp_rank[sender - ls.peers.first];
                if (r - v >= ls.window.size) continue;
                const size_t s = level_score(ls, entry.aggregate);
                if (!found || s > best_score || (s == best_score && r < best_rank) ||
                    (s == best_score && r == best_rank && level < best_level)) {
                    found = true;
                    best_score = s;
                    best_rank = r;
                    best_level = level;
                    best_sender = sender;
                }
            }
        }
        if (!found) return std::nullopt;
        const LevelState& ls = levels_[best_level - 1];
        const BufferedEntry& entry = ls.unverified.at(best_sender);
        VerificationItem item{best_level, best_sender, entry.aggregate, entry.individual, false};
        item.verify_individual = !(entry.aggregate == entry.individual) &&
                                 ls.verified_individuals.find(best_sender) ==
                                     ls.verified_individuals.end() &&
                                 !(ls.inc && ls.inc->bits.test(best_sender));
        return item;
    }

    // Applies a verification outcome. Valid results grow the window and are
    // merged wherever they improve the node's aggregates; invalid results
    // contract the window, blacklist the sender and drop its contributions.
    // Returns the fast-path burst for any level completed by the merge.
    std::vector<Outgoing> apply_verification(const VerificationItem& item, bool valid,
                                             TimeUs /*now*/) {
        if (item.level < 1 || item.level > levels_.size())
            throw std::logic_error("apply_verification: bad level");
        LevelState& ls = levels_[item.level - 1];
        if (!ls.peers.contains(item.sender))
            throw std::logic_error("apply_verification: sender not a peer of the level");

        auto it = ls.unverified.find(item.sender);
        if (it != ls.unverified.end() && it->second.aggregate == item.aggregate)
            ls.unverified.erase(it);

        if (!valid) {
            blacklist_.insert(item.sender);
            for (LevelState& each : levels_) {
                each.unverified.erase(item.sender);
                if (each.verified_individuals.erase(item.sender) > 0)
                    each.verified_bits.reset(item.sender);
            }
            ls.window = update_window(ls.window, false);
            return {};
        }

        ls.window = update_window(ls.window, true);
        if ((item.verify_individual || item.aggregate == item.individual) &&
            !ls.verified_individuals.count(item.sender)) {
            ls.verified_individuals.emplace(item.sender, item.individual);
            ls.verified_bits.set(item.sender);
        }

        const size_t before = ls.inc ? weight(*ls.inc) : 0;
        Contribution best = best_incoming(ls, item.aggregate);
        std::vector<Outgoing> out;
        if (weight(best) > before) {
            ls.inc = std::move(best);
            if (config_.verify_on_aggregate && !scheme_->verify(*ls.inc))
                throw std::logic_error("apply_verification: stored aggregate failed verification");
            if (ls.inc_complete()) ls.unverified.clear(); // rule 2
            refresh_outputs();
            if (!done_ && total_weight() >= config_.threshold) done_ = true;
            for (uint32_t k = item.level + 1; k <= levels_.size(); ++k) {
                LevelState& hi = levels_[k - 1];
                if (hi.fast_path_fired || hi.peers.empty() || !hi.out_complete()) continue;
                hi.fast_path_fired = true;
                uint32_t sent = 0;
                for (uint32_t p : hi.cpv) {
                    if (sent == config_.fast_path_peers) break;
                    if (blacklist_.count(p) || no_contact_.count(p)) continue;
                    out.push_back(Outgoing{p, make_message(k)});
                    ++sent;
                }
            }
        }
        return out;
    }

    // One message per active level to the next contact-order peer; inactive
    // levels (start time not reached, out incomplete) and fully flagged
    // levels send nothing.
    std::vector<Outgoing> on_tick(TimeUs now) {
        std::vector<Outgoing> out;
        for (uint32_t level = 1; level <= levels_.size(); ++level) {
            LevelState& ls = levels_[level - 1];
            if (ls.peers.empty()) continue;
            if (!(ls.out_complete() || now >= ls.start_time_us)) continue;
            for (size_t scanned = 0; scanned < ls.cpv.size(); ++scanned) {
                const uint32_t p = ls.cpv[ls.cpv_cursor];
                ls.cpv_cursor = (ls.cpv_cursor + 1) % ls.cpv.size();
                if (blacklist_.count(p) || no_contact_.count(p)) continue;
                out.push_back(Outgoing{p, make_message(level)});
                break;
            }
        }
        return out;
    }

    bool is_done() const { return done_; }

    size_t total_weight() const {
        size_t w = 1;
        for (const LevelState& ls : levels_)
            if (ls.inc) w += weight(*ls.inc);
        return w;
    }

    // The node's current best overall aggregate (inc_0 through inc_L).
    Contribution total_aggregate() const {
        Contribution running = own_individual_;
        for (const LevelState& ls : levels_)
            if (ls.inc) running = scheme_->aggregate(running, *ls.inc);
        return running;
    }

    uint32_t id() const { return id_; }
    uint32_t num_levels() const { return static_cast<uint32_t>(levels_.size()); }
    const LevelState& level(uint32_t l) const { return levels_.at(l - 1); }
    const std::set<uint32_t>& blacklist() const { return blacklist_; }
    const std::set<uint32_t>& no_contact_peers() const { return no_contact_; }
    const Contribution& own_individual() const { return own_individual_; }
    const NodeConfig& config() const { return config_; }

    size_t buffered_count() const {
        size_t c = 0;
        for (const LevelState& ls : levels_) c += ls.unverified.size();
        return c;
    }

    bool operator==(const NodeState&) const = default;

private:
    NodeState() = default;

    Message make_message(uint32_t level) const {
        const LevelState& ls = levels_[level - 1];
        return Message{id_, level, done_ || ls.inc_complete(), ls.out, own_individual_};
    }

    // Score of a candidate at its level: combined weight when aggregable
    // with inc, otherwise candidate plus the disjoint verified individuals.
    size_t level_score(const LevelState& ls, const Contribution& candidate) const {
        if (!ls.inc || ls.inc->bits.disjoint(candidate.bits))
            return weight(candidate) + (ls.inc ? weight(*ls.inc) : 0);
        return weight(candidate) + ls.verified_bits.count_outside(candidate.bits);
    }

    // Best achievable incoming aggregate from the current inc, the newly
    // verified aggregate, and the verified individuals. Bases are tried in
    // a fixed order so ties deterministically keep the current value.
    Contribution best_incoming(const LevelState& ls, const Contribution& agg) const {
        std::vector<Contribution> bases;
        if (ls.inc) {
            bases.push_back(*ls.inc);
            if (ls.inc->bits.disjoint(agg.bits)) bases.push_back(scheme_->aggregate(*ls.inc, agg));
        }
        bases.push_back(agg);
        size_t best_w = 0;
        size_t best_k = 0;
        for (size_t k = 0; k < bases.size(); ++k) {
            const size_t w = weight(bases[k]) + ls.verified_bits.count_outside(bases[k].bits);
            if (w > best_w) {
                best_w = w;
                best_k = k;
            }
        }
        Contribution result = bases[best_k];
        for (const auto& [sender, ind] : ls.verified_individuals)
            if (!result.bits.test(sender)) result = scheme_->aggregate(result, ind);
        return result;
    }

    // Recompute out_l = Aggr(inc_0, inc_1, ..., inc_{l-1}) for every level.
    void refresh_outputs() {
        Contribution running = own_individual_;
        for (LevelState& ls : levels_) {
            ls.out = running;
            if (config_.verify_on_aggregate && !scheme_->verify(ls.out))
                throw std::logic_error("refresh_outputs: outgoing aggregate failed verification");
            if (ls.inc) running = scheme_->aggregate(running, *ls.inc);
        }
        if (config_.verify_on_aggregate && !scheme_->verify(running))
            throw std::logic_error("refresh_outputs: total aggregate failed verification");
    }

    // Rules 2 and 3: drop buffers of completed levels and entries that do
    // not aggregate with inc and cannot outscore it.
    void prune() {
        for (LevelState& ls : levels_) {
            if (ls.unverified.empty()) continue;
            if (ls.inc_complete()) {
                ls.unverified.clear();
                continue;
            }
            if (!ls.inc) continue;
            for (auto it = ls.unverified.begin(); it != ls.unverified.end();) {
                const Contribution& cand = it->second.aggregate;
                if (!ls.inc->bits.disjoint(cand.bits) &&
                    level_score(ls, cand) <= weight(*ls.inc))
                    it = ls.unverified.erase(it);
                else
                    ++it;
            }
        }
    }

    uint32_t id_ = 0;
    const Roster* roster_ = nullptr;
    const ContributionScheme* scheme_ = nullptr;
    NodeConfig config_;
    Contribution own_individual_;
    std::vector<LevelState> levels_;
    std::set<uint32_t> blacklist_;
    std::set<uint32_t> no_contact_;
    bool done_ = false;
};

} // namespace handel

#endif

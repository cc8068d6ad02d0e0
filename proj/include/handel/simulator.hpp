#ifndef HANDEL_SIMULATOR_HPP
#define HANDEL_SIMULATOR_HPP

// Deterministic discrete-event simulation of a Handel run.
//
// The clock is integer microseconds; simultaneous events are ordered by
// sequence number, so a (Scenario, run_id) pair fully determines the run.
// Verification latency is modeled (sampled per verification, scaled by the
// node's speed factor) while verification *outcomes* are real: every
// selected contribution goes through the reference scheme, so invalid
// contributions fail exactly as they would in production.
//
// Honest nodes run the full protocol and keep disseminating (with the
// no-contact flag set) until the run ends; termination rests on every
// honest node eventually reaching every other one. The run ends when all
// honest nodes reached the threshold or at max_sim_time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "handel/digest.hpp"
#include "handel/node.hpp"
#include "handel/random.hpp"
#include "handel/scenario.hpp"

namespace handel {

// Gaussian verification time (mean scaled by the node's speed factor),
// rejected at <= 0 so samples are strictly positive.
inline double sample_verification_time(DetRng& rng, double speed_factor, double mean_ms = 4.0,
                                       double sigma_ms = 1.0) {
    double x = rng.gaussian(mean_ms, sigma_ms);
    while (x <= 0.0) x = rng.gaussian(mean_ms, sigma_ms);
    return x * speed_factor;
}

struct RunMetrics {
    bool completed = false;
    uint32_t n = 0;
    uint32_t honest_count = 0;
    uint32_t threshold = 0;
    double time_ms_avg = 0.0;
    double time_ms_max = 0.0;
    double msgs_avg = 0.0;
    double bytes_avg = 0.0;
    uint64_t verifs_min = 0;
    double verifs_avg = 0.0;
    uint64_t verifs_max = 0;
    size_t max_buffered = 0;
    // Bits of minimal-contribution adversaries found inside honest final
    // aggregates, summed over honest nodes.
    uint64_t minimal_bits_included = 0;

    // Per node-id detail (honest-only fields are 0/-1 elsewhere).
    std::vector<BehaviorKind> behavior;
    std::vector<double> done_at_ms;
    std::vector<uint64_t> msgs_sent;
    std::vector<uint64_t> bytes_sent;
    std::vector<uint64_t> verifications;
    std::vector<std::set<uint32_t>> blacklists;
    std::map<uint32_t, std::set<uint32_t>> byz_contacted; // byz id -> honest ids reached
};

namespace detail {

struct SimEvent {
    enum Kind { start, tick, deliver, verify_done };
    TimeUs at = 0;
    uint64_t seq = 0;
    Kind kind = start;
    uint32_t node = 0;
    Message msg;           // deliver
    VerificationItem item; // verify_done
    bool valid = false;    // verify_done
    uint64_t verifs = 0;   // verify_done
};

struct SimEventLater {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
};

} // namespace detail

class Simulation {
public:
    Simulation(const Scenario& scenario, uint32_t run_id)
        : sc_(scenario), run_seed_(HashInput("handel/run").u64(scenario.seed).u32(run_id).digest()) {
        sc_.validate();
        const uint32_t n = sc_.n;
        roster_ = Roster::make(n, run_seed_);
        const std::vector<uint8_t> msg_bytes = {'h', 'a', 'n', 'd', 'e', 'l'};
        scheme_.emplace(PublicParams(n, run_seed_, msg_bytes));
        ranking_.emplace(roster_);

        // Behavior assignment: shuffled so adversaries are uniform in id space.
        const auto counts = behavior_counts();
        std::vector<uint32_t> ids(n);
        for (uint32_t i = 0; i < n; ++i) ids[i] = i;
        DetRng brng(HashInput("handel/behaviors").bytes(run_seed_).seed64());
        fisher_yates(ids, brng);
        behavior_.assign(n, BehaviorKind::honest);
        size_t at = 0;
        for (uint32_t k = 0; k < counts[0]; ++k) behavior_[ids[at++]] = BehaviorKind::fail_silent;
        for (uint32_t k = 0; k < counts[1]; ++k) behavior_[ids[at++]] = BehaviorKind::byz_minimal;
        for (uint32_t k = 0; k < counts[2]; ++k) behavior_[ids[at++]] = BehaviorKind::byz_invalid;
        honest_count_ = n - counts[0] - counts[1] - counts[2];
        if (honest_count_ < 1) throw std::invalid_argument("behavior fractions: no honest node");
        threshold_ = static_cast<uint32_t>(
            std::ceil(sc_.threshold_fraction * honest_count_ - 1e-9));
        threshold_ = std::max(threshold_, 1u);

        if (sc_.latency.kind() == LatencyModel::Kind::matrix) {
            DetRng rrng(HashInput("handel/regions").bytes(run_seed_).seed64());
            region_.resize(n);
            for (uint32_t i = 0; i < n; ++i)
                region_[i] = static_cast<uint32_t>(rrng.below(sc_.latency.region_count()));
        }
        latency_seed_ = HashInput("handel/latency").bytes(run_seed_).seed64();

        DetRng srng(HashInput("handel/speeds").bytes(run_seed_).seed64());
        DetRng jrng(HashInput("handel/starts").bytes(run_seed_).seed64());
        nodes_.resize(n);
        for (uint32_t i = 0; i < n; ++i) {
            SimNode& sn = nodes_[i];
            sn.speed = sc_.speed_factor_min +
                       srng.unit() * (sc_.speed_factor_max - sc_.speed_factor_min);
            sn.start_at = static_cast<TimeUs>(std::llround(jrng.unit() * sc_.start_jitter_ms * 1000.0));
            sn.rng.emplace(HashInput("handel/node").bytes(run_seed_).u32(i).seed64());
        }
    }

    // Pairwise latency (microseconds). Symmetric, zero on self; distinct
    // nodes in the same region are 1 ms apart.
    TimeUs latency_us(uint32_t a, uint32_t b) const {
        if (a == b) return 0;
        double ms = 0.0;
        if (sc_.latency.kind() == LatencyModel::Kind::matrix) {
            ms = region_[a] == region_[b] ? 1.0 : sc_.latency.region_ms(region_[a], region_[b]);
        } else {
            ms = sc_.latency.parametric_ms(latency_seed_, a, b);
        }
        return static_cast<TimeUs>(std::llround(ms * 1000.0));
    }

    // Runs until every honest node reached the threshold or the time limit
    // passed, then drains: periodic ticks stop, in-flight deliveries and
    // pending verifications complete, so every buffered contribution is
    // either verified or pruned before metrics are collected.
    RunMetrics run() {
        const TimeUs max_time = static_cast<TimeUs>(std::llround(sc_.max_sim_time_ms * 1000.0));
        for (uint32_t i = 0; i < sc_.n; ++i)
            if (behavior_[i] != BehaviorKind::fail_silent)
                push({nodes_[i].start_at, next_seq(), detail::SimEvent::start, i, {}, {}, false, 0});

        while (!queue_.empty()) {
            if (!draining_ && done_honest_ == honest_count_) draining_ = true;
            const detail::SimEvent ev = queue_.top();
            queue_.pop();
            if (ev.at > max_time) break;
            if (draining_ && (ev.kind == detail::SimEvent::tick ||
                              ev.kind == detail::SimEvent::start))
                continue;
            if (ev.at < now_) throw std::logic_error("simulation: causality violated");
            now_ = ev.at;
            switch (ev.kind) {
                case detail::SimEvent::start: on_start(ev.node); break;
                case detail::SimEvent::tick: on_tick_event(ev.node); break;
                case detail::SimEvent::deliver: on_deliver(ev.node, ev.msg); break;
                case detail::SimEvent::verify_done: on_verify_done(ev); break;
            }
        }
        return collect();
    }

    const Roster& roster() const { return roster_; }
    const ContributionScheme& scheme() const { return *scheme_; }
    uint32_t threshold() const { return threshold_; }
    BehaviorKind behavior_of(uint32_t id) const { return behavior_[id]; }

private:
    struct SimNode {
        std::optional<NodeState> state; // honest only
        std::optional<DetRng> rng;
        double speed = 1.0;
        TimeUs start_at = 0;
        bool verifying = false;
        uint64_t msgs = 0;
        uint64_t bytes = 0;
        uint64_t verifs = 0;
        TimeUs done_at = -1;
        std::vector<size_t> byz_cursor;
    };

    std::array<uint32_t, 3> behavior_counts() const {
        auto count = [&](double f) {
            return static_cast<uint32_t>(std::llround(f * sc_.n));
        };
        return {count(sc_.fail_silent_fraction), count(sc_.byz_minimal_fraction),
                count(sc_.byz_invalid_fraction)};
    }

    uint64_t next_seq() { return seq_++; }

    void push(detail::SimEvent ev) { queue_.push(std::move(ev)); }

    NodeConfig node_config() const {
        NodeConfig cfg;
        cfg.dissemination_period_us =
            static_cast<TimeUs>(std::llround(sc_.dissemination_period_ms * 1000.0));
        cfg.fast_path_peers = sc_.fast_path_peers;
        cfg.level_delay_us = static_cast<TimeUs>(std::llround(sc_.level_delay_ms * 1000.0));
        cfg.threshold = threshold_;
        cfg.initial_window = sc_.initial_window;
        cfg.verify_on_aggregate = sc_.verify_on_aggregate;
        return cfg;
    }

    void on_start(uint32_t i) {
        SimNode& sn = nodes_[i];
        if (behavior_[i] == BehaviorKind::honest) {
            sn.state = NodeState::init(roster_, node_config(), *scheme_, *ranking_, i,
                                       scheme_->individual(i), now_);
            if (sn.state->is_done()) mark_done(i);
            dispatch_all(i, sn.state->on_tick(now_));
            kick_verification(i);
        } else {
            sn.byz_cursor.assign(roster_.levels, 0);
            byz_send(i);
        }
        if (!draining_)
            push({now_ + node_config().dissemination_period_us, next_seq(),
                  detail::SimEvent::tick, i, {}, {}, false, 0});
    }

    void on_tick_event(uint32_t i) {
        SimNode& sn = nodes_[i];
        if (behavior_[i] == BehaviorKind::honest) {
            dispatch_all(i, sn.state->on_tick(now_));
        } else {
            byz_send(i);
        }
        if (!draining_)
            push({now_ + node_config().dissemination_period_us, next_seq(),
                  detail::SimEvent::tick, i, {}, {}, false, 0});
    }

    void on_deliver(uint32_t i, const Message& msg) {
        if (behavior_[i] != BehaviorKind::honest) return; // absorbed
        SimNode& sn = nodes_[i];
        if (!sn.state) { // delivery is guaranteed: arrives once the node is up
            push({sn.start_at, next_seq(), detail::SimEvent::deliver, i, msg, {}, false, 0});
            return;
        }
        sn.state->handle_message(msg, now_);
        max_buffered_ = std::max(max_buffered_, sn.state->buffered_count());
        kick_verification(i);
    }

    void kick_verification(uint32_t i) {
        SimNode& sn = nodes_[i];
        if (sn.verifying) return;
        std::optional<VerificationItem> item = sn.state->next_verification();
        if (!item) return;
        // Outcomes come from the scheme itself; only the time is modeled.
        const bool agg_ok = scheme_->verify(item->aggregate);
        bool valid = agg_ok;
        uint64_t count = 1;
        double ms = sample_verification_time(*sn.rng, sn.speed, sc_.verify_mean_ms,
                                             sc_.verify_sigma_ms);
        if (agg_ok && item->verify_individual) {
            valid = scheme_->verify(item->individual);
            count += 1;
            ms += sample_verification_time(*sn.rng, sn.speed, sc_.verify_mean_ms,
                                           sc_.verify_sigma_ms);
        }
        sn.verifying = true;
        push({now_ + static_cast<TimeUs>(std::llround(ms * 1000.0)), next_seq(),
              detail::SimEvent::verify_done, i, {}, std::move(*item), valid, count});
    }

    void on_verify_done(const detail::SimEvent& ev) {
        SimNode& sn = nodes_[ev.node];
        sn.verifying = false;
        sn.verifs += ev.verifs;
        const bool was_done = sn.state->is_done();
        dispatch_all(ev.node, sn.state->apply_verification(ev.item, ev.valid, now_));
        if (!was_done && sn.state->is_done()) mark_done(ev.node);
        kick_verification(ev.node);
    }

    void mark_done(uint32_t i) {
        nodes_[i].done_at = now_;
        ++done_honest_;
    }

    void dispatch_all(uint32_t from, const std::vector<Outgoing>& out) {
        for (const Outgoing& o : out) dispatch(from, o.to, o.msg);
    }

    void dispatch(uint32_t from, uint32_t to, const Message& msg) {
        SimNode& sn = nodes_[from];
        sn.msgs += 1;
        sn.bytes += encoded_message_size(msg.sender, msg.level, sc_.n);
        if (behavior_[from] == BehaviorKind::byz_invalid &&
            behavior_[to] == BehaviorKind::honest)
            byz_contacted_[from].insert(to);
        push({now_ + latency_us(from, to), next_seq(), detail::SimEvent::deliver, to, msg, {},
              false, 0});
    }

    // Adversarial senders push one message per level each period: minimal
    // nodes advertise a valid weight-1 aggregate, invalid nodes claim the
    // full level range with a corrupted payload. Both target honest peers.
    void byz_send(uint32_t i) {
        SimNode& sn = nodes_[i];
        const Contribution own = scheme_->individual(i);
        for (uint32_t level = 1; level <= roster_.levels; ++level) {
            const IdRange peers = peer_range(i, level, roster_.n);
            if (peers.empty()) continue;
            uint32_t target = UINT32_MAX;
            for (size_t scanned = 0; scanned < peers.size; ++scanned) {
                const uint32_t p = peers.first + static_cast<uint32_t>(
                    (sn.byz_cursor[level - 1] + scanned) % peers.size);
                if (behavior_[p] == BehaviorKind::honest) {
                    target = p;
                    sn.byz_cursor[level - 1] = (p - peers.first + 1) % peers.size;
                    break;
                }
            }
            if (target == UINT32_MAX) continue;
            Message msg;
            msg.sender = i;
            msg.level = level;
            msg.no_contact = false;
            msg.individual = own;
            if (behavior_[i] == BehaviorKind::byz_minimal) {
                msg.aggregate = own;
            } else {
                const IdRange mine = own_range(i, level, roster_.n);
                msg.aggregate.bits = Bitset(roster_.n);
                for (uint32_t id = mine.first; id < mine.first + mine.size; ++id)
                    msg.aggregate.bits.set(id);
                for (auto& b : msg.aggregate.payload)
                    b = static_cast<uint8_t>(sn.rng->raw() & 0xff);
            }
            dispatch(i, target, msg);
        }
    }

    RunMetrics collect() const {
        RunMetrics m;
        m.n = sc_.n;
        m.honest_count = honest_count_;
        m.threshold = threshold_;
        m.behavior = behavior_;
        m.max_buffered = max_buffered_;
        m.byz_contacted = byz_contacted_;
        m.done_at_ms.assign(sc_.n, -1.0);
        m.msgs_sent.assign(sc_.n, 0);
        m.bytes_sent.assign(sc_.n, 0);
        m.verifications.assign(sc_.n, 0);
        m.blacklists.resize(sc_.n);
        bool all_done = true;
        double sum_t = 0, max_t = 0;
        double sum_msgs = 0, sum_bytes = 0, sum_verifs = 0;
        uint64_t vmin = UINT64_MAX, vmax = 0;
        for (uint32_t i = 0; i < sc_.n; ++i) {
            const SimNode& sn = nodes_[i];
            m.msgs_sent[i] = sn.msgs;
            m.bytes_sent[i] = sn.bytes;
            m.verifications[i] = sn.verifs;
            if (behavior_[i] != BehaviorKind::honest) continue;
            if (sn.state) {
                m.blacklists[i] = sn.state->blacklist();
                const Contribution total = sn.state->total_aggregate();
                total.bits.for_each_set([&](size_t id) {
                    if (behavior_[id] == BehaviorKind::byz_minimal) ++m.minimal_bits_included;
                });
            }
            if (sn.done_at < 0) {
                all_done = false;
                continue;
            }
            const double t = static_cast<double>(sn.done_at) / 1000.0;
            m.done_at_ms[i] = t;
            sum_t += t;
            max_t = std::max(max_t, t);
            sum_msgs += static_cast<double>(sn.msgs);
            sum_bytes += static_cast<double>(sn.bytes);
            sum_verifs += static_cast<double>(sn.verifs);
            vmin = std::min(vmin, sn.verifs);
            vmax = std::max(vmax, sn.verifs);
        }
        m.completed = all_done;
        const double h = static_cast<double>(honest_count_);
        m.time_ms_avg = sum_t / h;
        m.time_ms_max = max_t;
        m.msgs_avg = sum_msgs / h;
        m.bytes_avg = sum_bytes / h;
        m.verifs_min = vmin == UINT64_MAX ? 0 : vmin;
        m.verifs_avg = sum_verifs / h;
        m.verifs_max = vmax;
        return m;
    }

    Scenario sc_;
    Seed32 run_seed_{};
    Roster roster_;
    std::optional<XorTokenScheme> scheme_;
    std::optional<PeerRanking> ranking_;
    std::vector<BehaviorKind> behavior_;
    std::vector<uint32_t> region_;
    std::vector<SimNode> nodes_;
    uint64_t latency_seed_ = 0;
    uint32_t honest_count_ = 0;
    uint32_t threshold_ = 0;
    uint64_t seq_ = 0;
    TimeUs now_ = 0;
    uint32_t done_honest_ = 0;
    bool draining_ = false;
    size_t max_buffered_ = 0;
    std::map<uint32_t, std::set<uint32_t>> byz_contacted_;
    std::priority_queue<detail::SimEvent, std::vector<detail::SimEvent>, detail::SimEventLater>
        queue_;
};

inline RunMetrics run(const Scenario& scenario, uint32_t run_id = 0) {
    return Simulation(scenario, run_id).run();
}

inline std::vector<RunMetrics> run_set(const Scenario& scenario) {
    std::vector<RunMetrics> out;
    out.reserve(scenario.runs);
    for (uint32_t r = 0; r < scenario.runs; ++r) out.push_back(run(scenario, r));
    return out;
}

} // namespace handel

#endif

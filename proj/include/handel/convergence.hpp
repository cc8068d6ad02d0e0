#ifndef HANDEL_CONVERGENCE_HPP
#define HANDEL_CONVERGENCE_HPP

// Monte-Carlo verification of the convergence model: homogenization over id
// batches, reproduction over idealized VP prefixes, the binomial
// concentration bound, and the closed-form union bounds they are compared
// against.
//
// The model works over N = 2^n ids partitioned into batches
// I(k,j) = [j*2^k, (j+1)*2^k). The "level k" peer set of id i is the mirror
// image of i's own batch inside the enclosing batch I(k+1, .); levels run
// from the homogenization level l = ceil(log2 n) + r up to n-1. VP prefixes
// are sampled as uniform cardinality-ceil(C*n) subsets of the peer set,
// which matches the distribution of a uniform permutation prefix.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "handel/digest.hpp"
#include "handel/random.hpp"

namespace handel {

// P[Binomial(m, q) >= (1+delta) * m * q] <= ((e^delta) / (1+delta)^(1+delta))^(m*q).
inline double chernoff_bound(uint64_t m, double q, double delta) {
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("chernoff_bound: q outside [0, 1]");
    if (delta <= 0.0) throw std::invalid_argument("chernoff_bound: delta must be > 0");
    const double mu = static_cast<double>(m) * q;
    return std::exp(mu * (delta - (1.0 + delta) * std::log1p(delta)));
}

struct ConvergenceParams {
    uint32_t n_exp = 10;   // N = 2^n_exp participants
    double b_max = 0.25;   // bound on the expected Byzantine fraction
    double b = 0.2;        // actual Bernoulli parameter, <= b_max
    double tau = 0.5;      // threshold, < 1 - b_max
    double delta = 1.0;    // homogenization slack, tau <= 1 - (1+delta) b_max
    double C = 2.0;        // VP-prefix constant
    uint32_t r = 2;        // level offset: l = ceil(log2 n_exp) + r
    uint32_t trials = 1000;
    uint64_t seed = 1;

    double tau0() const { return 1.0 - (1.0 + delta) * b_max; }

    uint32_t homogenization_level() const {
        uint32_t l = 0;
        while ((1u << l) < n_exp) ++l; // ceil(log2 n_exp)
        return l + r;
    }

    uint32_t prefix_size() const {
        return static_cast<uint32_t>(std::ceil(C * static_cast<double>(n_exp) - 1e-12));
    }

    void validate() const {
        if (n_exp < 1 || n_exp > 24) throw std::invalid_argument("n_exp: out of range");
        if (b_max <= 0.0 || b_max >= 1.0) throw std::invalid_argument("b_max: outside (0, 1)");
        if (b < 0.0 || b > b_max) throw std::invalid_argument("b: outside [0, b_max]");
        if (tau <= 0.0 || tau >= 1.0 - b_max)
            throw std::invalid_argument("tau: outside (0, 1 - b_max)");
        if (delta <= 0.0 || tau > 1.0 - (1.0 + delta) * b_max + 1e-12)
            throw std::invalid_argument("delta: violates tau <= 1 - (1+delta) b_max");
        const double c_floor =
            std::max(std::log(2.0) / tau0(), std::log(2.0) / (2.0 * std::log(2.0) - 1.0));
        if (C <= c_floor) throw std::invalid_argument("C: below the admissible floor");
        if (homogenization_level() > n_exp)
            throw std::invalid_argument("r: homogenization level exceeds n_exp");
        if (trials < 1) throw std::invalid_argument("trials: must be >= 1");
    }
};

// Bernoulli(b) flags over N = 2^n_exp ids; true = Byzantine.
inline std::vector<uint8_t> sample_byzantine_flags(uint32_t n_exp, double b, DetRng& rng) {
    std::vector<uint8_t> flags(size_t{1} << n_exp, 0);
    for (auto& f : flags) f = rng.unit() < b ? 1 : 0;
    return flags;
}

// True iff every batch I(level, j) holds at most (1+delta)*b_max*2^level
// Byzantine ids.
inline bool homogenization_success(const std::vector<uint8_t>& flags, uint32_t level,
                                   double delta, double b_max) {
    const size_t n = flags.size();
    const size_t batch = size_t{1} << level;
    if (batch > n) throw std::invalid_argument("homogenization_success: level too large");
    const double limit = (1.0 + delta) * b_max * static_cast<double>(batch);
    for (size_t start = 0; start < n; start += batch) {
        size_t byz = 0;
        for (size_t i = start; i < start + batch; ++i) byz += flags[i];
        if (static_cast<double>(byz) > limit) return false;
    }
    return true;
}

// Union bound on homogenization failure: 2^(n-l) * (1-theta)^(b_max * 2^l),
// with 1-theta the Chernoff base for the slack delta.
inline double homogenization_failure_bound(uint32_t n_exp, uint32_t level, double delta,
                                           double b_max) {
    const double one_minus_theta = std::exp(delta - (1.0 + delta) * std::log1p(delta));
    const double batches = std::pow(2.0, static_cast<double>(n_exp) - level);
    return batches * std::pow(one_minus_theta, b_max * std::pow(2.0, level));
}

namespace detail {

// Uniform W-subset of [0, block_size) by partial Fisher-Yates over a scratch
// pool that is repaired after each draw.
class SubsetSampler {
public:
    explicit SubsetSampler(size_t block_size) : pool_(block_size) {
        for (size_t i = 0; i < block_size; ++i) pool_[i] = static_cast<uint32_t>(i);
    }

    // Writes W offsets into out (size W).
    void sample(uint32_t W, DetRng& rng, std::vector<uint32_t>& out) {
        const size_t m = pool_.size();
        swaps_.clear();
        for (uint32_t t = 0; t < W; ++t) {
            const size_t j = t + static_cast<size_t>(rng.below(m - t));
            std::swap(pool_[t], pool_[j]);
            swaps_.push_back(j);
            out[t] = pool_[t];
        }
        for (uint32_t t = W; t-- > 0;) std::swap(pool_[t], pool_[swaps_[t]]);
    }

private:
    std::vector<uint32_t> pool_;
    std::vector<size_t> swaps_;
};

} // namespace detail

// Reproduction phase over levels k in [start_level, n_exp): every honest id
// must (1) draw at least one honest id in its ceil(C*n)-prefix and (2) be
// drawn by at most 2*ceil(C*n) of its level-k peers.
inline bool reproduction_success(const std::vector<uint8_t>& flags, DetRng& rng, double C,
                                 uint32_t start_level) {
    const size_t n = flags.size();
    uint32_t n_exp = 0;
    while ((size_t{1} << n_exp) < n) ++n_exp;
    if ((size_t{1} << n_exp) != n)
        throw std::invalid_argument("reproduction_success: flag count not a power of two");
    const uint32_t W =
        static_cast<uint32_t>(std::ceil(C * static_cast<double>(n_exp) - 1e-12));
    if (start_level > n_exp || W > (size_t{1} << start_level))
        throw std::invalid_argument("reproduction_success: prefix larger than the peer set");

    std::vector<uint32_t> draw(W);
    std::vector<uint32_t> prefix_hits(n);
    bool ok = true;
    for (uint32_t k = start_level; k < n_exp; ++k) {
        const size_t block = size_t{1} << k;
        detail::SubsetSampler sampler(block);
        std::fill(prefix_hits.begin(), prefix_hits.end(), 0u);
        // Draw every id's prefix at this level (Byzantine ids draw too: their
        // prefixes load their peers' budgets), checking (1) for honest ids.
        for (size_t i = 0; i < n; ++i) {
            const size_t mirror_start = (i ^ block) & ~(block - 1);
            sampler.sample(W, rng, draw);
            bool honest_seen = false;
            for (uint32_t t = 0; t < W; ++t) {
                const size_t peer = mirror_start + draw[t];
                prefix_hits[peer] += 1;
                if (!flags[peer]) honest_seen = true;
            }
            if (!flags[i] && !honest_seen) ok = false;
        }
        for (size_t i = 0; i < n; ++i)
            if (!flags[i] && prefix_hits[i] > 2 * W) ok = false;
        if (!ok) return false; // keep rng draws per level deterministic
    }
    return ok;
}

// Closed-form bound on the joint failure of homogenization and
// reproduction: e^-n + n * 2^n * (e^(-tau0 C n) + (e/4)^(C n)).
inline double theorem_failure_bound(const ConvergenceParams& p) {
    const double n = static_cast<double>(p.n_exp);
    const double big_n = std::pow(2.0, n);
    return std::exp(-n) +
           n * big_n * (std::exp(-p.tau0() * p.C * n) + std::pow(std::exp(1.0) / 4.0, p.C * n));
}

struct ConvergenceEstimate {
    uint32_t successes = 0;
    uint32_t trials = 0;
    double success_rate = 0.0;
    double ci_low = 0.0;  // Wilson 95%
    double ci_high = 0.0;
    double analytic_bound = 0.0; // theorem failure bound (may exceed 1)
};

inline void wilson_interval(uint32_t successes, uint32_t trials, double& low, double& high) {
    const double z = 1.959963984540054; // 97.5th normal percentile
    const double nt = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nt;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nt;
    const double center = p + z2 / (2.0 * nt);
    const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt));
    low = successes == 0 ? 0.0 : (center - half) / denom;
    high = successes == trials ? 1.0 : (center + half) / denom;
}

inline ConvergenceEstimate estimate_theorem_probability(const ConvergenceParams& p) {
    p.validate();
    const uint32_t level = p.homogenization_level();
    ConvergenceEstimate est;
    est.trials = p.trials;
    est.analytic_bound = theorem_failure_bound(p);
    for (uint32_t t = 0; t < p.trials; ++t) {
        DetRng rng(HashInput("handel/convergence").u64(p.seed).u32(t).seed64());
        const std::vector<uint8_t> flags = sample_byzantine_flags(p.n_exp, p.b, rng);
        if (homogenization_success(flags, level, p.delta, p.b_max) &&
            reproduction_success(flags, rng, p.C, level))
            ++est.successes;
    }
    est.success_rate = static_cast<double>(est.successes) / static_cast<double>(p.trials);
    wilson_interval(est.successes, p.trials, est.ci_low, est.ci_high);
    return est;
}

inline const char* kConvergenceCsvHeader =
    "n,b,b_max,tau,delta,C,r,trials,success_rate,ci_low,ci_high,analytic_bound";

inline void write_convergence_csv(std::ostream& os, const ConvergenceParams& p,
                                  const ConvergenceEstimate& e) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%u,%.6f,%.6f,%.6f,%.6f,%.6f,%u,%u,%.6f,%.6f,%.6f,%.6g",
                  p.n_exp, p.b, p.b_max, p.tau, p.delta, p.C, p.r, p.trials, e.success_rate,
                  e.ci_low, e.ci_high, e.analytic_bound);
    os << kConvergenceCsvHeader << '\n' << buf << '\n';
}

} // namespace handel

#endif

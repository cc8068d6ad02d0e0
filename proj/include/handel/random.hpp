#ifndef HANDEL_RANDOM_HPP
#define HANDEL_RANDOM_HPP

// Deterministic random draws on top of std::mt19937_64. The raw generator
// output is pinned by the C++ standard; the bounded/real/Gaussian draws
// below are implemented by hand because the std distributions are not
// portable across standard library implementations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace handel {

class DetRng {
public:
    explicit DetRng(uint64_t seed) : gen_(seed) {}

    uint64_t raw() { return gen_(); }

    // Unbiased integer in [0, bound) via rejection sampling.
    uint64_t below(uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("DetRng::below: bound must be positive");
        const uint64_t max = std::numeric_limits<uint64_t>::max();
        const uint64_t limit = max - max % bound;
        uint64_t x = gen_();
        while (x >= limit) x = gen_();
        return x % bound;
    }

    // 53-bit uniform in [0, 1).
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; used where a zero would be a domain error.
    double unit_open() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    // Box-Muller, one value per call (two raw draws), so the consumed
    // stream length is independent of the result.
    double gaussian(double mean, double sigma) {
        const double u1 = unit_open();
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

private:
    std::mt19937_64 gen_;
};

// In-place Fisher-Yates: for i = n-1 .. 1, swap v[i] with v[below(i+1)].
template <typename T>
void fisher_yates(std::vector<T>& v, DetRng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace handel

#endif

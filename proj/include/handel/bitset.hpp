#ifndef HANDEL_BITSET_HPP
#define HANDEL_BITSET_HPP

// Fixed-size dynamic bitset over participant ids. Binary operations require
// equal lengths (the participant count of the enclosing context).

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace handel {

class Bitset {
public:
    Bitset() = default;

    explicit Bitset(size_t n_bits) : n_bits_(n_bits), words_((n_bits + 63) / 64, 0) {}

    static Bitset single(size_t n_bits, size_t index) {
        Bitset b(n_bits);
        b.set(index);
        return b;
    }

    static Bitset full(size_t n_bits) {
        Bitset b(n_bits);
        for (size_t i = 0; i < n_bits; ++i) b.set(i);
        return b;
    }

    size_t size() const { return n_bits_; }

    bool test(size_t i) const {
        check_index(i);
        return (words_[i / 64] >> (i % 64)) & 1u;
    }

    void set(size_t i) {
        check_index(i);
        words_[i / 64] |= uint64_t{1} << (i % 64);
    }

    void reset(size_t i) {
        check_index(i);
        words_[i / 64] &= ~(uint64_t{1} << (i % 64));
    }

    size_t count() const {
        size_t c = 0;
        for (uint64_t w : words_) c += static_cast<size_t>(std::popcount(w));
        return c;
    }

    bool any() const {
        for (uint64_t w : words_)
            if (w) return true;
        return false;
    }

    bool disjoint(const Bitset& other) const {
        check_same_size(other);
        for (size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i]) return false;
        return true;
    }

    // True iff every bit of `other` is also set here.
    bool contains(const Bitset& other) const {
        check_same_size(other);
        for (size_t i = 0; i < words_.size(); ++i)
            if (other.words_[i] & ~words_[i]) return false;
        return true;
    }

    Bitset united(const Bitset& other) const {
        check_same_size(other);
        Bitset out = *this;
        for (size_t i = 0; i < words_.size(); ++i) out.words_[i] |= other.words_[i];
        return out;
    }

    // Number of bits set here but clear in `other`.
    size_t count_outside(const Bitset& other) const {
        check_same_size(other);
        size_t c = 0;
        for (size_t i = 0; i < words_.size(); ++i)
            c += static_cast<size_t>(std::popcount(words_[i] & ~other.words_[i]));
        return c;
    }

    template <typename Fn>
    void for_each_set(Fn&& fn) const {
        for (size_t wi = 0; wi < words_.size(); ++wi) {
            uint64_t w = words_[wi];
            while (w) {
                const int b = std::countr_zero(w);
                fn(wi * 64 + static_cast<size_t>(b));
                w &= w - 1;
            }
        }
    }

    bool operator==(const Bitset&) const = default;

private:
    void check_index(size_t i) const {
        if (i >= n_bits_) throw std::invalid_argument("Bitset: index out of range");
    }
    void check_same_size(const Bitset& other) const {
        if (n_bits_ != other.n_bits_)
            throw std::invalid_argument("Bitset: length mismatch");
    }

    size_t n_bits_ = 0;
    std::vector<uint64_t> words_;
};

} // namespace handel

#endif

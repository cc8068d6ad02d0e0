#ifndef HANDEL_LATENCY_HPP
#define HANDEL_LATENCY_HPP

// Network latency models: a pairwise region matrix (the measured AWS
// inter-region latencies ship built in, arbitrary matrices load from CSV)
// and a parametric base+jitter model whose per-pair jitter is derived by
// mixing (seed, a, b), so it needs no per-pair storage and stays symmetric.

#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace handel {

namespace detail {
inline uint64_t mix64(uint64_t x) { // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}
} // namespace detail

class LatencyModel {
public:
    enum class Kind { matrix, parametric };

    static LatencyModel parametric(double base_ms, double jitter_ms) {
        if (base_ms < 0 || jitter_ms < 0)
            throw std::invalid_argument("LatencyModel: negative latency");
        LatencyModel m;
        m.kind_ = Kind::parametric;
        m.base_ms_ = base_ms;
        m.jitter_ms_ = jitter_ms;
        return m;
    }

    static LatencyModel matrix(std::vector<std::string> names,
                               std::vector<std::vector<double>> ms) {
        LatencyModel m;
        m.kind_ = Kind::matrix;
        m.names_ = std::move(names);
        m.ms_ = std::move(ms);
        m.check_matrix();
        return m;
    }

    // Inter-region round means measured between AWS datacenters, in ms.
    static LatencyModel aws_regions() {
        static const std::vector<std::string> names = {
            "Oregon",  "Virginia", "Mumbai", "Seoul",     "Singapore", "Sydney",
            "Tokyo",   "Canada",   "Frankfurt", "Ireland", "London"};
        static const double upper[][11] = {
            //          Vir  Mum  Seo  Sin  Syd  Tok  Can  Fra  Ire  Lon
            {0,   81, 216, 126, 165, 138,  97,  64, 164, 131, 141}, // Oregon
            {0,    0, 182, 181, 232, 195, 167,  13,  88,  80,  75}, // Virginia
            {0,    0,   0, 152,  62, 223, 123, 194, 111, 122, 113}, // Mumbai
            {0,    0,   0,   0,  97, 133,  35, 184, 259, 254, 264}, // Seoul
            {0,    0,   0,   0,   0, 169,  69, 218, 162, 174, 171}, // Singapore
            {0,    0,   0,   0,   0,   0, 105, 210, 282, 269, 271}, // Sydney
            {0,    0,   0,   0,   0,   0,   0, 156, 235, 222, 234}, // Tokyo
            {0,    0,   0,   0,   0,   0,   0,   0, 101,  78,  87}, // Canada
            {0,    0,   0,   0,   0,   0,   0,   0,   0,  24,  13}, // Frankfurt
            {0,    0,   0,   0,   0,   0,   0,   0,   0,   0,  12}, // Ireland
            {0,    0,   0,   0,   0,   0,   0,   0,   0,   0,   0}, // London
        };
        std::vector<std::vector<double>> ms(11, std::vector<double>(11, 0.0));
        for (size_t i = 0; i < 11; ++i)
            for (size_t j = i + 1; j < 11; ++j) ms[i][j] = ms[j][i] = upper[i][j];
        return matrix(names, std::move(ms));
    }

    // CSV: a header row of region names, then one row per region holding
    // its name and the latencies in header order.
    static LatencyModel from_csv(std::istream& in) {
        std::string line;
        if (!std::getline(in, line)) throw std::invalid_argument("latency csv: empty file");
        std::vector<std::string> names = split(line);
        if (!names.empty() && names.front().empty()) names.erase(names.begin());
        if (names.empty()) throw std::invalid_argument("latency csv: no regions in header");
        std::vector<std::vector<double>> ms(names.size(),
                                            std::vector<double>(names.size(), 0.0));
        size_t row = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (row >= names.size()) throw std::invalid_argument("latency csv: too many rows");
            std::vector<std::string> cells = split(line);
            if (cells.size() != names.size() + 1 || cells.front() != names[row])
                throw std::invalid_argument("latency csv: row does not match header");
            for (size_t j = 0; j < names.size(); ++j) ms[row][j] = std::stod(cells[j + 1]);
            ++row;
        }
        if (row != names.size()) throw std::invalid_argument("latency csv: missing rows");
        return matrix(std::move(names), std::move(ms));
    }

    Kind kind() const { return kind_; }
    size_t region_count() const { return names_.size(); }
    const std::vector<std::string>& region_names() const { return names_; }

    size_t region_index(const std::string& name) const {
        for (size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        throw std::invalid_argument("LatencyModel: unknown region " + name);
    }

    double region_ms(size_t a, size_t b) const {
        if (kind_ != Kind::matrix) throw std::logic_error("LatencyModel: not a matrix model");
        if (a >= names_.size() || b >= names_.size())
            throw std::invalid_argument("LatencyModel: unknown region");
        return ms_[a][b];
    }

    double base_ms() const { return base_ms_; }
    double jitter_ms() const { return jitter_ms_; }

    // Parametric pairwise latency; symmetric and stable per (seed, pair).
    double parametric_ms(uint64_t seed, uint32_t a, uint32_t b) const {
        if (a == b) return 0.0;
        const uint32_t lo = a < b ? a : b;
        const uint32_t hi = a < b ? b : a;
        const uint64_t h =
            detail::mix64(seed ^ detail::mix64((static_cast<uint64_t>(lo) << 32) | hi));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        return base_ms_ + u * jitter_ms_;
    }

private:
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            size_t start = 0;
            while (start < cell.size() && cell[start] == ' ') ++start;
            out.push_back(cell.substr(start));
        }
        return out;
    }

    void check_matrix() const {
        if (ms_.size() != names_.size())
            throw std::invalid_argument("LatencyModel: matrix size mismatch");
        for (size_t i = 0; i < ms_.size(); ++i) {
            if (ms_[i].size() != names_.size())
                throw std::invalid_argument("LatencyModel: matrix size mismatch");
            if (ms_[i][i] != 0.0)
                throw std::invalid_argument("LatencyModel: nonzero self latency");
            for (size_t j = 0; j < ms_.size(); ++j) {
                if (ms_[i][j] < 0) throw std::invalid_argument("LatencyModel: negative latency");
                if (ms_[i][j] != ms_[j][i])
                    throw std::invalid_argument("LatencyModel: matrix not symmetric");
            }
        }
    }

    Kind kind_ = Kind::parametric;
    double base_ms_ = 0.0;
    double jitter_ms_ = 0.0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> ms_;
};

} // namespace handel

#endif

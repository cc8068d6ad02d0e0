#ifndef HANDEL_SCENARIO_HPP
#define HANDEL_SCENARIO_HPP

// Simulation scenario: node count, behavior mix, latency model, timing
// parameters and seeds. Loadable from a flat key = value file; every
// validation error names the offending field.

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "handel/latency.hpp"

namespace handel {

enum class BehaviorKind { honest, fail_silent, byz_minimal, byz_invalid };

inline const char* to_string(BehaviorKind k) {
    switch (k) {
        case BehaviorKind::honest: return "honest";
        case BehaviorKind::fail_silent: return "fail_silent";
        case BehaviorKind::byz_minimal: return "byz_minimal";
        case BehaviorKind::byz_invalid: return "byz_invalid";
    }
    return "?";
}

struct Scenario {
    uint32_t n = 128;
    uint64_t seed = 1;
    double threshold_fraction = 0.999; // fraction of the honest nodes
    double fail_silent_fraction = 0.0;
    double byz_minimal_fraction = 0.0;
    double byz_invalid_fraction = 0.0;
    LatencyModel latency = LatencyModel::aws_regions();
    double start_jitter_ms = 100.0;
    double verify_mean_ms = 4.0;
    double verify_sigma_ms = 1.0;
    double speed_factor_min = 1.0 / 3.0;
    double speed_factor_max = 3.0;
    double max_sim_time_ms = 60'000.0;
    uint32_t runs = 5;
    double dissemination_period_ms = 20.0;
    uint32_t fast_path_peers = 10;
    double level_delay_ms = 50.0;
    uint32_t initial_window = 16;
    bool verify_on_aggregate = false;

    double honest_fraction() const {
        return 1.0 - fail_silent_fraction - byz_minimal_fraction - byz_invalid_fraction;
    }

    void validate() const {
        if (n < 1) throw std::invalid_argument("n: must be >= 1");
        if (fail_silent_fraction < 0 || byz_minimal_fraction < 0 || byz_invalid_fraction < 0)
            throw std::invalid_argument("behavior fractions: must be >= 0");
        if (fail_silent_fraction + byz_minimal_fraction + byz_invalid_fraction > 1.0 + 1e-12)
            throw std::invalid_argument(
                "behavior fractions: fail_silent + byz_minimal + byz_invalid exceed 1");
        if (honest_fraction() <= 0)
            throw std::invalid_argument("behavior fractions: no honest nodes left");
        if (threshold_fraction <= 0)
            throw std::invalid_argument("threshold: must be positive");
        if (threshold_fraction > 1.0)
            throw std::invalid_argument(
                "threshold: exceeds the honest fraction (it is a fraction of the honest nodes "
                "and cannot be above 1)");
        if (start_jitter_ms < 0) throw std::invalid_argument("start_jitter_ms: must be >= 0");
        if (verify_mean_ms <= 0) throw std::invalid_argument("verify_mean_ms: must be > 0");
        if (verify_sigma_ms < 0) throw std::invalid_argument("verify_sigma_ms: must be >= 0");
        if (speed_factor_min <= 0 || speed_factor_max < speed_factor_min)
            throw std::invalid_argument("speed_factor: invalid range");
        if (max_sim_time_ms <= 0) throw std::invalid_argument("max_sim_time_ms: must be > 0");
        if (runs < 1) throw std::invalid_argument("runs: must be >= 1");
        if (dissemination_period_ms <= 0)
            throw std::invalid_argument("dissemination_period_ms: must be > 0");
        if (fast_path_peers < 1) throw std::invalid_argument("fast_path_peers: must be >= 1");
        if (level_delay_ms < 0) throw std::invalid_argument("level_delay_ms: must be >= 0");
        if (initial_window < 1 || initial_window > 128)
            throw std::invalid_argument("initial_window: must be in [1, 128]");
    }
};

// Flat key = value format; '#' starts a comment. Unknown keys are errors.
// latency accepts "aws", "parametric <base_ms> <jitter_ms>" or "csv <path>".
inline Scenario load_scenario(std::istream& in) {
    Scenario s;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = true;
            for (char c : line)
                if (!isspace(static_cast<unsigned char>(c))) blank = false;
            if (blank) continue;
            throw std::invalid_argument("scenario line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        auto trim = [](std::string v) {
            size_t a = 0, b = v.size();
            while (a < b && isspace(static_cast<unsigned char>(v[a]))) ++a;
            while (b > a && isspace(static_cast<unsigned char>(v[b - 1]))) --b;
            return v.substr(a, b - a);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto as_u32 = [&](const std::string& v) {
            try {
                size_t used = 0;
                const unsigned long x = std::stoul(v, &used);
                if (used != v.size()) throw std::exception();
                return static_cast<uint32_t>(x);
            } catch (...) {
                throw std::invalid_argument(key + ": cannot parse value '" + v + "'");
            }
        };
        auto as_u64 = [&](const std::string& v) -> uint64_t {
            try {
                size_t used = 0;
                const uint64_t x = std::stoull(v, &used);
                if (used != v.size()) throw std::exception();
                return x;
            } catch (...) {
                throw std::invalid_argument(key + ": cannot parse value '" + v + "'");
            }
        };
        auto as_double = [&](const std::string& v) {
            try {
                size_t used = 0;
                const double x = std::stod(v, &used);
                if (used != v.size()) throw std::exception();
                return x;
            } catch (...) {
                throw std::invalid_argument(key + ": cannot parse value '" + v + "'");
            }
        };
        if (key == "n") s.n = as_u32(value);
        else if (key == "seed") s.seed = as_u64(value);
        else if (key == "threshold") s.threshold_fraction = as_double(value);
        else if (key == "fail_silent") s.fail_silent_fraction = as_double(value);
        else if (key == "byz_minimal") s.byz_minimal_fraction = as_double(value);
        else if (key == "byz_invalid") s.byz_invalid_fraction = as_double(value);
        else if (key == "start_jitter_ms") s.start_jitter_ms = as_double(value);
        else if (key == "verify_mean_ms") s.verify_mean_ms = as_double(value);
        else if (key == "verify_sigma_ms") s.verify_sigma_ms = as_double(value);
        else if (key == "max_sim_time_ms") s.max_sim_time_ms = as_double(value);
        else if (key == "runs") s.runs = as_u32(value);
        else if (key == "dissemination_period_ms") s.dissemination_period_ms = as_double(value);
        else if (key == "fast_path_peers") s.fast_path_peers = as_u32(value);
        else if (key == "level_delay_ms") s.level_delay_ms = as_double(value);
        else if (key == "initial_window") s.initial_window = as_u32(value);
        else if (key == "speed_factor_min") s.speed_factor_min = as_double(value);
        else if (key == "speed_factor_max") s.speed_factor_max = as_double(value);
        else if (key == "safety_checks") s.verify_on_aggregate = as_u32(value) != 0;
        else if (key == "latency") {
            std::istringstream ls(value);
            std::string mode;
            ls >> mode;
            if (mode == "aws") {
                s.latency = LatencyModel::aws_regions();
            } else if (mode == "parametric") {
                double base = 0, jitter = 0;
                if (!(ls >> base >> jitter))
                    throw std::invalid_argument("latency: parametric needs base and jitter");
                s.latency = LatencyModel::parametric(base, jitter);
            } else if (mode == "csv") {
                std::string path;
                ls >> path;
                std::ifstream f(path);
                if (!f) throw std::invalid_argument("latency: cannot open " + path);
                s.latency = LatencyModel::from_csv(f);
            } else {
                throw std::invalid_argument("latency: unknown mode " + mode);
            }
        } else {
            throw std::invalid_argument("unknown key " + key);
        }
    }
    s.validate();
    return s;
}

} // namespace handel

#endif

#ifndef HANDEL_REPORT_HPP
#define HANDEL_REPORT_HPP

// Parameter sweeps and CSV reporting for simulation runs.
//
// CSV schema (version 1):
//   run_id,n,behavior_kind,behavior_fraction,time_ms_avg,time_ms_max,
//   msgs_avg,bytes_avg,verifs_min,verifs_avg,verifs_max,completed
// `simulate` emits one row per run (run_id = run index); sweeps and attack
// tables emit one aggregated row per parameter value, with run_id holding
// the number of runs aggregated.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "handel/simulator.hpp"

namespace handel {

inline const char* kRunCsvHeader =
    "run_id,n,behavior_kind,behavior_fraction,time_ms_avg,time_ms_max,msgs_avg,bytes_avg,"
    "verifs_min,verifs_avg,verifs_max,completed";

namespace detail {
inline std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}
} // namespace detail

// The adversarial label of a scenario: the single nonzero adversarial kind,
// "honest" when there is none, "mixed" otherwise. The fraction is the total
// adversarial fraction.
inline std::string behavior_label(const Scenario& s) {
    const bool fs = s.fail_silent_fraction > 0;
    const bool bm = s.byz_minimal_fraction > 0;
    const bool bi = s.byz_invalid_fraction > 0;
    const int kinds = int(fs) + int(bm) + int(bi);
    if (kinds == 0) return "honest";
    if (kinds > 1) return "mixed";
    if (fs) return "fail_silent";
    if (bm) return "byz_minimal";
    return "byz_invalid";
}

inline double adversarial_fraction(const Scenario& s) {
    return s.fail_silent_fraction + s.byz_minimal_fraction + s.byz_invalid_fraction;
}

inline std::string run_csv_row(const Scenario& s, uint32_t run_id, const RunMetrics& m) {
    std::string out;
    out += std::to_string(run_id);
    out += ',';
    out += std::to_string(m.n);
    out += ',';
    out += behavior_label(s);
    out += ',';
    out += detail::fixed3(adversarial_fraction(s));
    out += ',';
    out += detail::fixed3(m.time_ms_avg);
    out += ',';
    out += detail::fixed3(m.time_ms_max);
    out += ',';
    out += detail::fixed3(m.msgs_avg);
    out += ',';
    out += detail::fixed3(m.bytes_avg);
    out += ',';
    out += std::to_string(m.verifs_min);
    out += ',';
    out += detail::fixed3(m.verifs_avg);
    out += ',';
    out += std::to_string(m.verifs_max);
    out += ',';
    out += m.completed ? '1' : '0';
    return out;
}

// Mean of per-run averages, max of per-run maxima, min/max of the per-run
// verification extremes; completed only if every run completed.
inline RunMetrics aggregate_runs(const std::vector<RunMetrics>& runs) {
    RunMetrics agg;
    if (runs.empty()) return agg;
    agg.n = runs.front().n;
    agg.honest_count = runs.front().honest_count;
    agg.threshold = runs.front().threshold;
    agg.completed = true;
    agg.verifs_min = UINT64_MAX;
    const double k = static_cast<double>(runs.size());
    for (const RunMetrics& m : runs) {
        agg.completed = agg.completed && m.completed;
        agg.time_ms_avg += m.time_ms_avg / k;
        agg.time_ms_max = std::max(agg.time_ms_max, m.time_ms_max);
        agg.msgs_avg += m.msgs_avg / k;
        agg.bytes_avg += m.bytes_avg / k;
        agg.verifs_avg += m.verifs_avg / k;
        agg.verifs_min = std::min(agg.verifs_min, m.verifs_min);
        agg.verifs_max = std::max(agg.verifs_max, m.verifs_max);
        agg.max_buffered = std::max(agg.max_buffered, m.max_buffered);
    }
    return agg;
}

inline Scenario with_axis_value(const Scenario& base, const std::string& axis, double value) {
    Scenario s = base;
    if (axis == "dissemination_period") s.dissemination_period_ms = value;
    else if (axis == "fast_path_peers") s.fast_path_peers = static_cast<uint32_t>(value);
    else if (axis == "level_delay") s.level_delay_ms = value;
    else if (axis == "n") s.n = static_cast<uint32_t>(value);
    else if (axis == "fail_silent") s.fail_silent_fraction = value;
    else if (axis == "byz_minimal") s.byz_minimal_fraction = value;
    else if (axis == "byz_invalid") s.byz_invalid_fraction = value;
    else throw std::invalid_argument("sweep axis: unknown axis " + axis);
    s.validate();
    return s;
}

struct SweepRow {
    double value = 0.0;
    Scenario scenario;
    RunMetrics metrics; // aggregated over scenario.runs
};

inline std::vector<SweepRow> sweep(const Scenario& base, const std::string& axis,
                                   const std::vector<double>& values) {
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        SweepRow row;
        row.value = v;
        row.scenario = with_axis_value(base, axis, v);
        row.metrics = aggregate_runs(run_set(row.scenario));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << kRunCsvHeader << '\n';
    for (const SweepRow& row : rows)
        os << run_csv_row(row.scenario, row.scenario.runs, row.metrics) << '\n';
}

inline void write_runs_csv(std::ostream& os, const Scenario& s,
                           const std::vector<RunMetrics>& runs) {
    os << kRunCsvHeader << '\n';
    for (size_t i = 0; i < runs.size(); ++i)
        os << run_csv_row(s, static_cast<uint32_t>(i), runs[i]) << '\n';
}

} // namespace handel

#endif

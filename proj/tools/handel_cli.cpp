// Command-line front end: single scenarios, parameter sweeps, attack
// tables, convergence experiments and a wire-format self check. All output
// is CSV (stdout or --out) and every random draw derives from --seed, so
// identical invocations produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "handel/convergence.hpp"
#include "handel/report.hpp"
#include "handel/scenario.hpp"
#include "handel/simulator.hpp"
#include "handel/wire.hpp"

namespace {

struct ScenarioFlags {
    std::string config_path;
    std::string latency_mode; // aws | parametric
    double latency_base = 10.0;
    double latency_jitter = 190.0;
    std::string latency_matrix_path;
};

void add_scenario_options(CLI::App* cmd, handel::Scenario& s, ScenarioFlags& f) {
    cmd->add_option("--config", f.config_path, "scenario file (key = value lines)");
    cmd->add_option("--n", s.n, "participant count");
    cmd->add_option("--seed", s.seed, "master seed");
    cmd->add_option("--threshold", s.threshold_fraction, "required fraction of honest nodes");
    cmd->add_option("--fail-silent", s.fail_silent_fraction, "fail-silent fraction");
    cmd->add_option("--byz-minimal", s.byz_minimal_fraction, "minimal-contribution fraction");
    cmd->add_option("--byz-invalid", s.byz_invalid_fraction, "invalid-contribution fraction");
    cmd->add_option("--runs", s.runs, "repetitions per scenario");
    cmd->add_option("--dp", s.dissemination_period_ms, "dissemination period, ms");
    cmd->add_option("--fast-path", s.fast_path_peers, "fast path peer count");
    cmd->add_option("--level-delay", s.level_delay_ms, "per-level start delay, ms");
    cmd->add_option("--start-jitter", s.start_jitter_ms, "node start jitter, ms");
    cmd->add_option("--verify-mean", s.verify_mean_ms, "mean verification time, ms");
    cmd->add_option("--verify-sigma", s.verify_sigma_ms, "verification time sigma, ms");
    cmd->add_option("--max-time", s.max_sim_time_ms, "simulated time limit, ms");
    cmd->add_option("--initial-window", s.initial_window, "initial verification window");
    cmd->add_flag("--safety-checks", s.verify_on_aggregate,
                  "verify every stored aggregate (slower)");
    cmd->add_option("--latency", f.latency_mode, "latency model: aws or parametric")
        ->check(CLI::IsMember({"aws", "parametric"}));
    cmd->add_option("--latency-base", f.latency_base, "parametric base, ms");
    cmd->add_option("--latency-jitter", f.latency_jitter, "parametric jitter, ms");
    cmd->add_option("--latency-matrix", f.latency_matrix_path, "region matrix CSV");
}

handel::Scenario resolve_scenario(const CLI::App* cmd, handel::Scenario s,
                                  const ScenarioFlags& f) {
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::invalid_argument("config: cannot open " + f.config_path);
        handel::Scenario from_file = handel::load_scenario(in);
        // Flags given on the command line override the file.
        auto keep = [&](auto member, const char* flag) {
            if (cmd->count(flag) == 0) return;
            from_file.*member = s.*member;
        };
        keep(&handel::Scenario::n, "--n");
        keep(&handel::Scenario::seed, "--seed");
        keep(&handel::Scenario::threshold_fraction, "--threshold");
        keep(&handel::Scenario::fail_silent_fraction, "--fail-silent");
        keep(&handel::Scenario::byz_minimal_fraction, "--byz-minimal");
        keep(&handel::Scenario::byz_invalid_fraction, "--byz-invalid");
        keep(&handel::Scenario::runs, "--runs");
        keep(&handel::Scenario::dissemination_period_ms, "--dp");
        keep(&handel::Scenario::fast_path_peers, "--fast-path");
        keep(&handel::Scenario::level_delay_ms, "--level-delay");
        keep(&handel::Scenario::start_jitter_ms, "--start-jitter");
        keep(&handel::Scenario::verify_mean_ms, "--verify-mean");
        keep(&handel::Scenario::verify_sigma_ms, "--verify-sigma");
        keep(&handel::Scenario::max_sim_time_ms, "--max-time");
        keep(&handel::Scenario::initial_window, "--initial-window");
        keep(&handel::Scenario::verify_on_aggregate, "--safety-checks");
        s = from_file;
    }
    if (!f.latency_matrix_path.empty()) {
        std::ifstream in(f.latency_matrix_path);
        if (!in)
            throw std::invalid_argument("latency-matrix: cannot open " + f.latency_matrix_path);
        s.latency = handel::LatencyModel::from_csv(in);
    } else if (f.latency_mode == "parametric") {
        s.latency = handel::LatencyModel::parametric(f.latency_base, f.latency_jitter);
    } else if (f.latency_mode == "aws") {
        s.latency = handel::LatencyModel::aws_regions();
    }
    s.validate();
    return s;
}

int write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file " << out_path << "\n";
        return 1;
    }
    out << content;
    return 0;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stod(cell));
    }
    if (out.empty()) throw std::invalid_argument("values: empty list");
    return out;
}

std::string hex(const std::vector<uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Handel aggregation protocol simulator"};
    app.require_subcommand(1);

    handel::Scenario scenario;
    ScenarioFlags flags;
    std::string out_path;
    bool require_completion = false;

    CLI::App* simulate = app.add_subcommand("simulate", "run one scenario");
    add_scenario_options(simulate, scenario, flags);
    simulate->add_option("--out", out_path, "output CSV path (default stdout)");
    simulate->add_flag("--require-completion", require_completion,
                       "exit nonzero unless every run completed");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter");
    std::string axis;
    std::string values_csv;
    add_scenario_options(sweep_cmd, scenario, flags);
    sweep_cmd->add_option("--axis", axis, "dissemination_period | fast_path_peers | level_delay | n | fail_silent | byz_minimal | byz_invalid")
        ->required();
    sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
    sweep_cmd->add_option("--out", out_path, "output CSV path (default stdout)");
    sweep_cmd->add_flag("--require-completion", require_completion,
                        "exit nonzero unless every run completed");

    CLI::App* attacks = app.add_subcommand("attacks", "attack ratio table");
    std::string kind;
    std::string ratios_csv = "0,0.01,0.25,0.5";
    add_scenario_options(attacks, scenario, flags);
    attacks->add_option("--kind", kind, "silent | minimal | invalid")->required()
        ->check(CLI::IsMember({"silent", "minimal", "invalid"}));
    attacks->add_option("--ratios", ratios_csv, "comma-separated adversary ratios");
    attacks->add_option("--out", out_path, "output CSV path (default stdout)");
    attacks->add_flag("--require-completion", require_completion,
                      "exit nonzero unless every run completed");

    CLI::App* convergence = app.add_subcommand("convergence", "convergence model Monte Carlo");
    handel::ConvergenceParams cp;
    convergence->add_option("--n-exp", cp.n_exp, "N = 2^n participants");
    convergence->add_option("--b", cp.b, "Byzantine Bernoulli parameter");
    convergence->add_option("--b-max", cp.b_max, "bound on the Byzantine fraction");
    convergence->add_option("--tau", cp.tau, "threshold");
    convergence->add_option("--delta", cp.delta, "homogenization slack");
    convergence->add_option("--C", cp.C, "VP prefix constant");
    convergence->add_option("--r", cp.r, "level offset");
    convergence->add_option("--trials", cp.trials, "Monte Carlo trials");
    convergence->add_option("--seed", cp.seed, "master seed");
    convergence->add_option("--out", out_path, "output CSV path (default stdout)");

    CLI::App* wire = app.add_subcommand("wire-check", "encode and check a top-level message");
    uint32_t wire_n = 4000;
    uint32_t wire_sender = 1337;
    uint32_t wire_level = 0; // 0 = top level
    wire->add_option("--n", wire_n, "participant count");
    wire->add_option("--sender", wire_sender, "sender id");
    wire->add_option("--level", wire_level, "level (default: top)");
    wire->add_option("--out", out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            const handel::Scenario s = resolve_scenario(simulate, scenario, flags);
            const std::vector<handel::RunMetrics> runs = handel::run_set(s);
            std::ostringstream os;
            handel::write_runs_csv(os, s, runs);
            const int rc = write_output(out_path, os.str());
            if (rc != 0) return rc;
            if (require_completion)
                for (const handel::RunMetrics& m : runs)
                    if (!m.completed) return 1;
            return 0;
        }
        if (sweep_cmd->parsed()) {
            const handel::Scenario base = resolve_scenario(sweep_cmd, scenario, flags);
            const std::vector<handel::SweepRow> rows =
                handel::sweep(base, axis, parse_values(values_csv));
            std::ostringstream os;
            handel::write_sweep_csv(os, rows);
            const int rc = write_output(out_path, os.str());
            if (rc != 0) return rc;
            if (require_completion)
                for (const handel::SweepRow& row : rows)
                    if (!row.metrics.completed) return 1;
            return 0;
        }
        if (attacks->parsed()) {
            const handel::Scenario base = resolve_scenario(attacks, scenario, flags);
            const std::string axis_name = kind == "silent"    ? "fail_silent"
                                          : kind == "minimal" ? "byz_minimal"
                                                              : "byz_invalid";
            const std::vector<handel::SweepRow> rows =
                handel::sweep(base, axis_name, parse_values(ratios_csv));
            std::ostringstream os;
            handel::write_sweep_csv(os, rows);
            const int rc = write_output(out_path, os.str());
            if (rc != 0) return rc;
            if (require_completion)
                for (const handel::SweepRow& row : rows)
                    if (!row.metrics.completed) return 1;
            return 0;
        }
        if (convergence->parsed()) {
            const handel::ConvergenceEstimate est = handel::estimate_theorem_probability(cp);
            std::ostringstream os;
            handel::write_convergence_csv(os, cp, est);
            return write_output(out_path, os.str());
        }
        if (wire->parsed()) {
            const uint32_t level = wire_level == 0 ? handel::num_levels(wire_n) : wire_level;
            const handel::Seed32 seed = handel::sha256(
                reinterpret_cast<const uint8_t*>("handel/wire-check"), 17);
            const handel::PublicParams params(wire_n, seed, {'h', 'a', 'n', 'd', 'e', 'l'});
            const handel::XorTokenScheme scheme(params);
            const handel::IdRange range = handel::own_range(wire_sender, level, wire_n);
            handel::Contribution agg = scheme.individual(range.first);
            for (uint32_t id = range.first + 1; id < range.first + range.size; ++id)
                agg = scheme.aggregate(agg, scheme.individual(id));
            const handel::Message msg{wire_sender, level, false, agg,
                                      scheme.individual(wire_sender)};
            const std::vector<uint8_t> bytes = handel::encode_message(msg, wire_n);
            const auto back = handel::decode_message(bytes, wire_n);
            const bool roundtrip = back.has_value() && *back == msg;
            const handel::Digest32 digest = handel::sha256(bytes.data(), bytes.size());
            std::ostringstream os;
            os << "n,level,sender,bytes,roundtrip,sha256\n";
            os << wire_n << ',' << level << ',' << wire_sender << ',' << bytes.size() << ','
               << (roundtrip ? 1 : 0) << ','
               << hex(std::vector<uint8_t>(digest.begin(), digest.end())) << '\n';
            const int rc = write_output(out_path, os.str());
            if (rc != 0) return rc;
            return roundtrip && bytes.size() <= 410 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "handel/scenario.hpp"

using namespace handel;

TEST_CASE("empty config yields the default parameter set") {
    std::istringstream in("");
    const Scenario s = load_scenario(in);
    CHECK(s.dissemination_period_ms == 20.0);
    CHECK(s.fast_path_peers == 10);
    CHECK(s.level_delay_ms == 50.0);
    CHECK(s.initial_window == 16);
    CHECK(s.threshold_fraction == 0.999);
    CHECK(s.start_jitter_ms == 100.0);
    CHECK(s.verify_mean_ms == 4.0);
    CHECK(s.runs == 5);
    CHECK(s.latency.kind() == LatencyModel::Kind::matrix);
}

TEST_CASE("keys parse and comments are ignored") {
    std::istringstream in(
        "# a scenario\n"
        "n = 256\n"
        "seed = 99\n"
        "fail_silent = 0.25\n"
        "threshold = 0.51\n"
        "latency = parametric 10 40\n"
        "\n"
        "runs = 2 # trailing comment\n");
    const Scenario s = load_scenario(in);
    CHECK(s.n == 256);
    CHECK(s.seed == 99);
    CHECK(s.fail_silent_fraction == 0.25);
    CHECK(s.threshold_fraction == 0.51);
    CHECK(s.runs == 2);
    CHECK(s.latency.kind() == LatencyModel::Kind::parametric);
    CHECK(s.latency.base_ms() == 10.0);
}

TEST_CASE("fractions summing past one are rejected") {
    std::istringstream in("fail_silent = 0.7\nbyz_invalid = 0.5\n");
    CHECK_THROWS_WITH(load_scenario(in), Catch::Matchers::ContainsSubstring("behavior fractions"));
}

TEST_CASE("threshold above the honest fraction is rejected with the field name") {
    std::istringstream in("threshold = 1.2\n");
    CHECK_THROWS_WITH(load_scenario(in), Catch::Matchers::ContainsSubstring("threshold"));
}

TEST_CASE("unknown keys and malformed lines are named") {
    std::istringstream bad_key("frobnicate = 1\n");
    CHECK_THROWS_WITH(load_scenario(bad_key), Catch::Matchers::ContainsSubstring("frobnicate"));
    std::istringstream bad_line("n 128\n");
    CHECK_THROWS_WITH(load_scenario(bad_line), Catch::Matchers::ContainsSubstring("line 1"));
    std::istringstream bad_value("n = lots\n");
    CHECK_THROWS_WITH(load_scenario(bad_value), Catch::Matchers::ContainsSubstring("n"));
}

TEST_CASE("zero honest nodes is impossible") {
    std::istringstream in("fail_silent = 1.0\n");
    CHECK_THROWS_AS(load_scenario(in), std::invalid_argument);
}

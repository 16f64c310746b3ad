#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "explab/cli.hpp"
#include "support.hpp"

using namespace explab;

namespace {

std::string scenario_dir() {
    const char* env = std::getenv("EXPLAB_SCENARIOS");
    return env != nullptr ? env : "scenarios";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kValid = R"({
  "domain": [0, 1],
  "density": {"breakpoints": [0.5], "values": [1.5, 0.5]},
  "ground_truth": {"breakpoints": [0.6, 0.9], "first_value": 0},
  "class": {"type": "k_boundary", "k": 1},
  "delta": 0.1
})";

std::string with(const std::string& from, const std::string& to) {
    std::string s = kValid;
    auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

std::string error_path(const std::string& text) {
    try {
        parse_scenario_text(text);
    } catch (const input_error& e) {
        return e.path();
    }
    return "<accepted>";
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("explab_test_" + name);
}

}  // namespace

TEST_CASE("scenario parsing reports field paths") {
    CHECK_NOTHROW(parse_scenario_text(kValid));
    CHECK(error_path(with("[1.5, 0.5]", "[1.5, -0.5]")) == "$.density.values[1]");
    CHECK(error_path(with("[1.5, 0.5]", "[1.5]")) == "$.density.values");
    CHECK(error_path(with("[1.5, 0.5]", "[1.5, 0.6]")) == "$.density");
    CHECK(error_path(with("\"first_value\": 0", "\"first_value\": 2")) == "$.ground_truth.first_value");
    CHECK(error_path(with("[0.6, 0.9]", "[0.9, 0.6]")) == "$.ground_truth");
    CHECK(error_path(with("\"k\": 1", "\"k\": 0")) == "$.class.k");
    CHECK(error_path(with("\"k_boundary\"", "\"spline\"")) == "$.class.type");
    CHECK(error_path(with("\"delta\": 0.1", "\"delta\": -1")) == "$.delta");
    CHECK(error_path(with("\"delta\": 0.1", "\"delta\": \"x\"")) == "$.delta");
    CHECK(error_path(with("\"delta\": 0.1", "\"delta\": 0.1, \"extra\": 1")) == "$.extra");
    CHECK(error_path(with("\"delta\": 0.1", "\"dlta\": 0.1")) != "<accepted>");
    CHECK(error_path("{") == "$");
    CHECK(error_path("[]") == "$");
    CHECK(error_path(with("[0, 1]", "[1, 0]")) == "$.domain");
}

TEST_CASE("scenario JSON round trip is idempotent") {
    auto sc = parse_scenario_text(kValid);
    auto once = dump_json(scenario_to_json(sc));
    auto again = dump_json(scenario_to_json(parse_scenario_text(once)));
    CHECK(once == again);
    auto linear = with("{\"type\": \"k_boundary\", \"k\": 1}", "{\"type\": \"linear2d\"}");
    auto lin = parse_scenario_text(linear);
    CHECK(dump_json(scenario_to_json(lin)) == dump_json(scenario_to_json(parse_scenario_text(dump_json(scenario_to_json(lin))))));
}

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    Json j;
    j["x"] = 0.1;
    j["inf"] = std::numeric_limits<double>::infinity();
    CHECK(dump_json(j, 0) == "{\"x\":0.10000000000000001,\"inf\":\"inf\"}\n");
}

TEST_CASE("analyze report for the agnostic threshold scenario") {
    auto out = analyze(load_scenario(scenario_dir() + "/agnostic_threshold.json"));
    const Json& r = out.report;
    CHECK(out.warnings.empty());
    REQUIRE(r["glps"].size() == 2);
    CHECK(r["glps"][0]["boundaries"][0].get<double>() == doctest::Approx(0.6));
    CHECK(r["glps"][1]["boundaries"][0].get<double>() == doctest::Approx(1.0));
    const Json& q = r["alphabet"]["q"];
    CHECK(q[0].get<double>() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(q[1].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(q[2].get<double>() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r["exponents"]["d"].get<double>() == doctest::Approx(0.0551).epsilon(2e-3));
    CHECK(r["exponents"]["combined"].get<double>() == doctest::Approx(0.025));
    CHECK(r["delta_max"].get<double>() == doctest::Approx(0.2));
}

TEST_CASE("analyze report for a realizable scenario") {
    auto out = analyze(load_scenario(scenario_dir() + "/realizable_threshold.json"));
    CHECK_FALSE(out.report["exponents"].contains("d"));
    CHECK(out.report["notes"][0] == "realizable: exponent delta/4");
    CHECK(out.report["delta_max"].get<double>() == std::numeric_limits<double>::infinity());
    CHECK(dump_json(out.report).find("\"delta_max\": \"inf\"") != std::string::npos);
}

TEST_CASE("command exit codes") {
    std::ostringstream err;
    auto report = temp_path("report.json");
    CHECK(run_analyze(scenario_dir() + "/agnostic_threshold.json", report.string(), err) == exit_ok);

    auto late = temp_path("late.json");
    {
        auto text = read_file(scenario_dir() + "/agnostic_threshold.json");
        text.replace(text.find("\"delta\": 0.1"), 12, "\"delta\": 0.3");
        std::ofstream(late) << text;
    }
    std::ostringstream late_err;
    CHECK(run_analyze(late.string(), report.string(), late_err) == exit_assumption);
    CHECK(late_err.str().find("delta_max=0.2") != std::string::npos);

    auto broken = temp_path("broken.json");
    std::ofstream(broken) << "{\"domain\": [0, 1]}";
    std::ostringstream broken_err;
    CHECK(run_analyze(broken.string(), report.string(), broken_err) == exit_invalid_input);
    CHECK(broken_err.str().find("$.density") != std::string::npos);

    CHECK(exit_code_for(resource_error("x")) == exit_resource);
    CHECK(exit_code_for(assumption_violation("x")) == exit_assumption);
    CHECK(exit_code_for(unsupported_class_error("x")) == exit_invalid_input);
    CHECK(exit_code_for(internal_error("x")) == exit_failure);
}

TEST_CASE("n-grid parsing") {
    CHECK(parse_n_grid("20:200:20").size() == 10);
    CHECK(parse_n_grid("5:5:1") == std::vector<std::size_t>{5});
    CHECK_THROWS_AS(parse_n_grid("20:10:5"), input_error);
    CHECK_THROWS_AS(parse_n_grid("a:b:c"), input_error);
    CHECK_THROWS_AS(parse_n_grid("1:2"), input_error);
}

TEST_CASE("simulate output is deterministic and RFC 4180 shaped") {
    auto sc = testing_support::agnostic_scenario();
    SimulateOptions opt{{10, 20}, 2000, 9, SimulateMode::conditional};
    auto a = simulate(sc, opt);
    auto b = simulate(sc, opt);
    CHECK(a.csv == b.csv);
    CHECK(dump_json(a.sidecar) == dump_json(b.sidecar));
    CHECK(a.csv.rfind("n,p_hat,ci_low,ci_high,exponent_pointwise\r\n", 0) == 0);
    CHECK(a.sidecar.contains("d_hat"));

    auto real = simulate(testing_support::realizable_scenario(), opt);
    CHECK_FALSE(real.sidecar.contains("d_hat"));
    CHECK(real.sidecar.contains("note"));

    SimulateOptions dec{{10}, 500, 9, SimulateMode::decomposition};
    CHECK_THROWS_AS(simulate(testing_support::agnostic_scenario(0.3), dec), assumption_violation);
}

TEST_CASE("oracle output") {
    auto sc = testing_support::agnostic_scenario();
    auto out = oracle(sc, OracleOptions{2, std::nullopt});
    std::istringstream lines(out.csv);
    std::string header;
    std::string row1;
    std::string row2;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    CHECK(header == "n,upper,lower,exponent_upper,exponent_lower\r");
    CHECK(row2.rfind("2,", 0) == 0);
    CHECK(std::abs(std::stod(row2.substr(2)) - 0.55) < 1e-15);

    auto zero = oracle(sc, OracleOptions{30, 0});
    std::istringstream zl(zero.csv);
    std::string line;
    std::getline(zl, line);
    while (std::getline(zl, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line.substr(0, line.size() - 1));
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        REQUIRE(cells.size() >= 3);
        CHECK(cells[1] == cells[2]);
    }
}

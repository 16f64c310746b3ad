#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "explab/errors.hpp"
#include "explab/structure.hpp"

namespace explab {

using Json = nlohmann::ordered_json;

// Invalid scenario document; path names the offending field, e.g. "$.density.values[1]".
class input_error : public argument_error {
public:
    input_error(std::string path, const std::string& message)
        : argument_error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

Scenario parse_scenario(const Json& doc);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);
Json scenario_to_json(const Scenario& sc);

// %.17g; non-finite values become the strings "inf", "-inf", "nan".
std::string format_number(double v);
// Deterministic JSON text with every float printed by format_number.
std::string dump_json(const Json& doc, int indent = 2);

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_invalid_input = 2,
    exit_assumption = 3,
    exit_resource = 4,
};

int exit_code_for(const std::exception& e);

struct AnalyzeOutput {
    Json report;
    std::vector<std::string> warnings;
};

AnalyzeOutput analyze(const Scenario& sc);

enum class SimulateMode { pac, conditional, decomposition };

struct SimulateOptions {
    std::vector<std::size_t> n_grid;
    std::uint64_t trials = 1000000;
    std::uint64_t seed = 1;
    SimulateMode mode = SimulateMode::conditional;
};

// Parses "a:b:step" into a, a + step, ..., up to b inclusive.
std::vector<std::size_t> parse_n_grid(const std::string& spec);

struct SeriesOutput {
    std::string csv;
    Json sidecar;
};

SeriesOutput simulate(const Scenario& sc, const SimulateOptions& opt);

struct OracleOptions {
    std::size_t n_max = 2000;
    // Shift for the lower bound; twice the boundary count when absent.
    std::optional<std::size_t> ell;
};

SeriesOutput oracle(const Scenario& sc, const OracleOptions& opt);

// Command entry points: read the scenario, write outputs, report problems on
// err and return an exit code.
int run_analyze(const std::string& scenario_path, const std::string& out_path, std::ostream& err);
int run_simulate(const std::string& scenario_path, const std::string& out_path, const SimulateOptions& opt,
                 std::ostream& err);
int run_oracle(const std::string& scenario_path, const std::string& out_path, const OracleOptions& opt,
               std::ostream& err);

}  // namespace explab

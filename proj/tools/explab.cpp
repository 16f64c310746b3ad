#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "explab/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Error-exponent analysis of threshold learning problems"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out;

    auto* analyze = app.add_subcommand("analyze", "GLPs, alphabet, delta_max and exponents as JSON");
    analyze->add_option("scenario", scenario, "scenario JSON file")->required();
    analyze->add_option("out", out, "report JSON file")->required();

    explab::SimulateOptions sim;
    std::string n_grid = "20:200:20";
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates as CSV plus a JSON sidecar");
    simulate->add_option("scenario", scenario, "scenario JSON file")->required();
    simulate->add_option("out", out, "CSV file; the sidecar goes to <out>.json")->required();
    simulate->add_option("--n-grid", n_grid, "sample sizes a:b:step")->capture_default_str();
    simulate->add_option("--trials", sim.trials, "trials per sample size")->capture_default_str()->check(
        CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "64-bit seed")->capture_default_str();
    std::map<std::string, explab::SimulateMode> modes{{"pac", explab::SimulateMode::pac},
                                                      {"conditional", explab::SimulateMode::conditional},
                                                      {"decomposition", explab::SimulateMode::decomposition}};
    simulate->add_option("--mode", sim.mode, "pac | conditional | decomposition")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case))
        ->capture_default_str();

    explab::OracleOptions orc;
    std::string ell = "auto";
    auto* oracle = app.add_subcommand("oracle", "exact type-sum probabilities as CSV plus a JSON sidecar");
    oracle->add_option("scenario", scenario, "scenario JSON file")->required();
    oracle->add_option("out", out, "CSV file; the sidecar goes to <out>.json")->required();
    oracle->add_option("--n-max", orc.n_max, "largest sample size")->capture_default_str()->check(
        CLI::PositiveNumber);
    oracle->add_option("--ell", ell, "lower-bound shift: auto or a non-negative integer")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : explab::exit_invalid_input;
    }

    if (*analyze) {
        return explab::run_analyze(scenario, out, std::cerr);
    }
    if (*simulate) {
        try {
            sim.n_grid = explab::parse_n_grid(n_grid);
        } catch (const explab::error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return explab::exit_invalid_input;
        }
        return explab::run_simulate(scenario, out, sim, std::cerr);
    }
    if (ell != "auto") {
        try {
            std::size_t used = 0;
            long long v = std::stoll(ell, &used);
            if (used != ell.size() || v < 0) {
                throw std::invalid_argument(ell);
            }
            orc.ell = static_cast<std::size_t>(v);
        } catch (const std::logic_error&) {
            std::cerr << "error: --ell: expected auto or a non-negative integer\n";
            return explab::exit_invalid_input;
        }
    }
    return explab::run_oracle(scenario, out, orc, std::cerr);
}

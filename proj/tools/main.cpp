#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "patentsurv/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Survival analysis of patent renewal durations"};
    app.require_subcommand(1);
    app.fallthrough();

    bool quiet = false;
    app.add_flag("--quiet", quiet, "Route prose to stderr, keeping stdout machine-readable");

    std::string input = "-";
    std::string group_by;
    double level = 0.95;
    std::string km_out = "km_curves.csv";
    std::vector<std::string> covariates;
    std::vector<std::string> interactions;
    std::string ties = "efron";
    std::string json_out;
    std::string suite_dir = "suite_out";
    std::string stars = "table-note";
    std::string sim_config;
    std::string sim_out = "simulated.csv";
    std::string truth_out;
    std::optional<std::uint64_t> seed;

    CLI::App* validate = app.add_subcommand("validate", "Check a renewal CSV against the schema");
    validate->add_option("input", input, "CSV file, or - for stdin")->required();

    CLI::App* km = app.add_subcommand("km", "Kaplan-Meier survival curves");
    km->add_option("input", input, "CSV file, or - for stdin")->required();
    km->add_option("--group-by", group_by, "Stratify by dsir, ow or tech");
    km->add_option("--level", level, "Confidence band level (default 0.95)");
    km->add_option("--out", km_out, "Curve CSV path, or - for stdout");

    CLI::App* logrank = app.add_subcommand("logrank", "Log-rank test across groups");
    logrank->add_option("input", input, "CSV file, or - for stdin")->required();
    logrank->add_option("--group-by", group_by, "Compare groups of dsir, ow or tech")->required();

    CLI::App* cox = app.add_subcommand("cox", "Proportional-hazards regression");
    cox->add_option("input", input, "CSV file, or - for stdin")->required();
    cox->add_option("--covariates", covariates,
                    "Covariate labels (DSIR, NC, NI, FS, TS, OW, a technology dummy, or tech "
                    "for all dummies with Instruments as reference)")
        ->required()
        ->delimiter(',');
    cox->add_option("--interactions", interactions, "Interaction products, e.g. OW*DSIR")
        ->delimiter(',');
    cox->add_option("--ties", ties, "Tie handling: efron or breslow (default efron)");
    cox->add_option("--json", json_out, "Write the full fit report as JSON to this path");

    CLI::App* suite = app.add_subcommand("suite", "Fit the seven builtin regressions");
    suite->add_option("input", input, "CSV file, or - for stdin")->required();
    suite->add_option("--out-dir", suite_dir, "Directory for suite.txt/.csv/.json");
    suite->add_option("--stars", stars, "Significance ladder: table-note or conventional");

    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic renewal cohort");
    simulate->add_option("config", sim_config, "JSON config (defaults used when omitted)");
    simulate->add_option("--out", sim_out, "Cohort CSV path, or - for stdout");
    simulate->add_option("--truth-out", truth_out,
                         "Truth report path (default: out path with .truth.json)");
    simulate->add_option("--seed", seed, "Override the config seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    patentsurv::CliStreams io{std::cin, std::cout, std::cerr, quiet};
    patentsurv::CommandOutcome outcome;
    if (*validate)
        outcome = patentsurv::cmd_validate(input, io);
    else if (*km)
        outcome = patentsurv::cmd_km(input, group_by, level, km_out, io);
    else if (*logrank)
        outcome = patentsurv::cmd_logrank(input, group_by, io);
    else if (*cox)
        outcome = patentsurv::cmd_cox(input, covariates, interactions, ties, json_out, io);
    else if (*suite)
        outcome = patentsurv::cmd_suite(input, suite_dir, stars, io);
    else if (*simulate)
        outcome = patentsurv::cmd_simulate(sim_config, sim_out, truth_out, seed, io);
    return outcome.exit_code;
}

#include "patentsurv/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "patentsurv/cox.hpp"
#include "patentsurv/dataset.hpp"
#include "patentsurv/design.hpp"
#include "patentsurv/errors.hpp"
#include "patentsurv/kaplan_meier.hpp"
#include "patentsurv/log_rank.hpp"
#include "patentsurv/model_suite.hpp"
#include "patentsurv/numerics.hpp"
#include "patentsurv/simulator.hpp"

namespace fs = std::filesystem;

namespace patentsurv {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Prose goes to err when quiet or when a machine payload owns stdout.
std::ostream& prose(CliStreams& io, bool stdout_taken) {
    return (io.quiet || stdout_taken) ? io.err : io.out;
}

CommandOutcome guarded(CliStreams& io, const std::function<CommandOutcome()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        io.err << "error: " << e.what() << '\n';
        return {2, {}, e.what()};
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << '\n';
        return {1, {}, e.what()};
    }
}

Dataset load_input(const std::string& path, CliStreams& io) {
    if (path == "-") return load_dataset(io.in, "stdin");
    if (!fs::exists(path)) throw ConfigError("input file not found: " + path);
    return load_dataset_file(path);
}

// Runs writer against out_path ("-" = stdout). Returns the artifact path
// (empty for stdout).
std::string write_payload(const std::string& out_path, CliStreams& io,
                          const std::function<void(std::ostream&)>& writer) {
    if (out_path == "-") {
        writer(io.out);
        return {};
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + out_path);
    writer(f);
    if (!f) throw Error("write failed: " + out_path);
    return out_path;
}

CoxModelSpec spec_from_labels(const std::vector<std::string>& covariates,
                              const std::vector<std::string>& interactions,
                              const std::string& ties) {
    static const std::vector<std::string> tech_dummies = {"Electrical", "Instrument", "Chemistry",
                                                          "Mechanical", "OtherField"};
    CoxModelSpec spec;
    spec.name = "cli";
    spec.ties = ties_from_string(ties);
    for (const std::string& raw : covariates) {
        if (raw == "tech") {
            spec.all_tech_with_reference = true;
            continue;
        }
        auto canon = canonical_covariate_label(raw);
        if (!canon) throw ConfigError("unknown covariate label '" + raw + "'");
        if (std::find(tech_dummies.begin(), tech_dummies.end(), *canon) != tech_dummies.end())
            spec.tech_dummies.push_back(*canon);
        else
            spec.covariates.push_back(*canon);
    }
    for (const std::string& raw : interactions) {
        auto star = raw.find('*');
        if (star == std::string::npos || star == 0 || star + 1 == raw.size())
            throw ConfigError("interaction must look like A*B, got '" + raw + "'");
        spec.interactions.emplace_back(raw.substr(0, star), raw.substr(star + 1));
    }
    return spec;
}

}  // namespace

CommandOutcome cmd_validate(const std::string& input, CliStreams& io) {
    return guarded(io, [&]() -> CommandOutcome {
        Dataset d = load_input(input, io);
        ValidationReport report = validate(d);
        std::ostream& p = prose(io, false);
        if (report.ok()) {
            std::string line = "OK: " + std::to_string(d.size()) + " records";
            p << line << '\n';
            return {0, {}, line};
        }
        for (const ValidationIssue& issue : report.issues)
            p << "row " << issue.row << ": " << issue.message << '\n';
        std::string line = std::to_string(report.issues.size()) + " validation issue(s)";
        p << line << '\n';
        return {1, {}, line};
    });
}

CommandOutcome cmd_km(const std::string& input, const std::string& group_by, double level,
                      const std::string& out_path, CliStreams& io) {
    return guarded(io, [&]() -> CommandOutcome {
        Dataset d = load_input(input, io);
        std::vector<SurvivalCurve> curves = fit_km(d, group_by);
        if (level != 0.95)
            for (SurvivalCurve& c : curves) c = greenwood_band(c, level);

        CommandOutcome outcome;
        std::string artifact =
            write_payload(out_path, io, [&](std::ostream& os) { write_curves_csv(curves, os); });
        if (!artifact.empty()) outcome.artifacts.push_back(artifact);

        std::ostream& p = prose(io, out_path == "-");
        for (const SurvivalCurve& c : curves) {
            auto median = c.median_survival();
            p << "median survival " << c.group_label << ": "
              << (median ? std::to_string(*median) : std::string("not reached")) << '\n';
        }
        if (!artifact.empty()) p << "wrote " << artifact << '\n';
        outcome.summary = std::to_string(curves.size()) + " curve(s)";
        return outcome;
    });
}

CommandOutcome cmd_logrank(const std::string& input, const std::string& group_by,
                           CliStreams& io) {
    return guarded(io, [&]() -> CommandOutcome {
        Dataset d = load_input(input, io);
        LogRankResult res = log_rank_test(d, group_by);
        std::ostream& p = prose(io, false);
        for (const LogRankGroup& g : res.per_group)
            p << "group " << g.label << ": observed " << fmt("%.4f", g.observed) << ", expected "
              << fmt("%.4f", g.expected) << '\n';
        char line[96];
        std::snprintf(line, sizeof line, "chi2(%d) = %.4f, p = %.4f", res.df, res.chi_square,
                      res.p_value);
        p << line << '\n';
        return {0, {}, line};
    });
}

CommandOutcome cmd_cox(const std::string& input, const std::vector<std::string>& covariates,
                       const std::vector<std::string>& interactions, const std::string& ties,
                       const std::string& json_path, CliStreams& io) {
    return guarded(io, [&]() -> CommandOutcome {
        Dataset d = load_input(input, io);
        CoxModelSpec spec = spec_from_labels(covariates, interactions, ties);
        DesignMatrix m = encode_design(d, spec);
        FitOptions options;
        options.ties = spec.ties;
        CoxFit fit = fit_cox(m, options);

        std::optional<PhTestResult> ph;
        std::string ph_note;
        if (fit.converged) {
            try {
                ph = ph_test(fit, m);
            } catch (const Error& e) {
                ph_note = e.what();
            }
        }

        CommandOutcome outcome;
        if (!json_path.empty()) {
            nlohmann::json report = fit_report_json(fit, ph ? &*ph : nullptr);
            std::string artifact = write_payload(json_path, io, [&](std::ostream& os) {
                os << report.dump(2) << '\n';
            });
            if (!artifact.empty()) outcome.artifacts.push_back(artifact);
        }

        std::ostream& p = prose(io, json_path == "-");
        p << "covariate        coef       se         hazard_ratio  p\n";
        for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
            double z = fit.coefficients[j] / fit.standard_errors[j];
            char row[160];
            std::snprintf(row, sizeof row, "%-15s  %9.4f  %9.4f  %12.4f  %.4f",
                          fit.column_names[j].c_str(), fit.coefficients[j],
                          fit.standard_errors[j], fit.hazard_ratios[j],
                          chi_square_sf(z * z, 1));
            p << row << '\n';
        }
        char lr[96];
        std::snprintf(lr, sizeof lr, "LR chi2(%d) = %.4f, p = %.4f", fit.lr_df, fit.lr_stat,
                      fit.lr_p);
        p << lr << '\n';
        if (ph) {
            char phl[96];
            std::snprintf(phl, sizeof phl, "PH global chi2(%d) = %.4f, p = %.4f", ph->global.df,
                          ph->global.chi_square, ph->global.p_value);
            p << phl << '\n';
        } else if (!ph_note.empty()) {
            p << "PH test unavailable: " << ph_note << '\n';
        }
        p << "iterations: " << fit.iterations << ", converged: " << (fit.converged ? "yes" : "no")
          << ", ties: " << ties_to_string(fit.ties) << '\n';
        for (const std::string& a : outcome.artifacts) p << "wrote " << a << '\n';

        if (!fit.converged) {
            io.err << "error: fit did not converge within the iteration limit\n";
            outcome.exit_code = 1;
            outcome.summary = "did not converge";
            return outcome;
        }
        outcome.summary = lr;
        return outcome;
    });
}

CommandOutcome cmd_suite(const std::string& input, const std::string& out_dir,
                         const std::string& stars, CliStreams& io) {
    return guarded(io, [&]() -> CommandOutcome {
        StarConvention convention;
        if (stars == "table-note")
            convention = StarConvention::TableNote;
        else if (stars == "conventional")
            convention = StarConvention::Conventional;
        else
            throw ConfigError("--stars must be table-note or conventional, got '" + stars + "'");

        Dataset d = load_input(input, io);
        SuiteResult result = run_suite(d, builtin_suite());

        std::string grid = render_suite_text(result, convention);
        CommandOutcome outcome;
        fs::create_directories(out_dir);
        auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& w) {
            std::string path = (fs::path(out_dir) / name).string();
            outcome.artifacts.push_back(write_payload(path, io, w));
        };
        emit("suite.txt", [&](std::ostream& os) { os << grid; });
        emit("suite.csv", [&](std::ostream& os) { write_suite_csv(result, convention, os); });
        emit("suite.json", [&](std::ostream& os) { os << suite_json(result).dump(2) << '\n'; });

        std::ostream& p = prose(io, false);
        p << grid;
        for (const std::string& a : outcome.artifacts) p << "wrote " << a << '\n';

        int fitted = 0;
        for (const SuiteModelResult& slot : result.models) fitted += slot.fit.has_value();
        outcome.exit_code = fitted > 0 ? 0 : 1;
        outcome.summary = std::to_string(fitted) + " of " + std::to_string(result.models.size()) +
                          " models fitted";
        return outcome;
    });
}

CommandOutcome cmd_simulate(const std::string& config_path, const std::string& out_path,
                            const std::string& truth_path, std::optional<std::uint64_t> seed,
                            CliStreams& io) {
    return guarded(io, [&]() -> CommandOutcome {
        SimConfig cfg;
        if (config_path.empty()) {
            cfg = default_sim_config();
        } else {
            if (!fs::exists(config_path))
                throw ConfigError("config file not found: " + config_path);
            std::ifstream f(config_path);
            nlohmann::json j;
            try {
                f >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config: " + std::string(e.what()));
            }
            cfg = sim_config_from_json(j);
        }
        if (seed) {
            cfg.seed = *seed;
            validate_config(cfg);
        }

        Dataset d = simulate(cfg);
        CommandOutcome outcome;
        std::string artifact =
            write_payload(out_path, io, [&](std::ostream& os) { save_dataset(d, os); });
        if (!artifact.empty()) outcome.artifacts.push_back(artifact);

        std::string truth_target = truth_path;
        if (truth_target.empty() && out_path != "-")
            truth_target = (fs::path(out_path).replace_extension(".truth.json")).string();
        nlohmann::json truth = truth_report(cfg);
        if (!truth_target.empty()) {
            std::string t = write_payload(truth_target, io, [&](std::ostream& os) {
                os << truth.dump(2) << '\n';
            });
            if (!t.empty()) outcome.artifacts.push_back(t);
        }

        std::ostream& p = prose(io, out_path == "-" || truth_target == "-");
        p << "simulated " << d.size() << " records (seed " << cfg.seed << ")\n";
        p << "expected censoring fraction: "
          << fmt("%.4f", truth.at("expected_censoring_fraction").get<double>()) << '\n';
        for (const std::string& a : outcome.artifacts) p << "wrote " << a << '\n';
        outcome.summary = "simulated " + std::to_string(d.size()) + " records";
        return outcome;
    });
}

}  // namespace patentsurv

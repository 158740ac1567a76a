#include "patentsurv/model_suite.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <utility>

#include "patentsurv/design.hpp"
#include "patentsurv/errors.hpp"
#include "patentsurv/numerics.hpp"

namespace patentsurv {

namespace {

std::string fmt4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

double wald_p(const CoxFit& fit, std::size_t j) {
    double z = fit.coefficients[j] / fit.standard_errors[j];
    return chi_square_sf(z * z, 1);
}

std::optional<std::size_t> column_of(const CoxFit& fit, const std::string& label) {
    auto it = std::find(fit.column_names.begin(), fit.column_names.end(), label);
    if (it == fit.column_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - fit.column_names.begin());
}

}  // namespace

std::string significance_stars(double p, StarConvention convention) {
    if (convention == StarConvention::TableNote) {
        if (p < 0.001) return "***";
        if (p < 0.01) return "*";
        if (p < 0.05) return "**";
        return "";
    }
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

std::vector<CoxModelSpec> builtin_suite() {
    const std::vector<std::string> base = {"DSIR", "NC", "NI", "FS", "TS", "OW"};
    const std::vector<std::string> one_tech = {"Electrical", "Instrument", "Chemistry",
                                               "Mechanical", "OtherField"};
    std::vector<CoxModelSpec> specs(7);
    specs[0].name = "Model 1";
    specs[0].covariates = {"DSIR"};
    for (std::size_t i = 1; i <= 5; ++i) {
        specs[i].name = "Model " + std::to_string(i + 1);
        specs[i].covariates = base;
        specs[i].tech_dummies = {one_tech[i - 1]};
    }
    specs[6].name = "Model 7";
    specs[6].covariates = base;
    specs[6].all_tech_with_reference = true;
    specs[6].interactions = {{"OW", "DSIR"}};
    return specs;
}

SuiteResult run_suite(const Dataset& d, const std::vector<CoxModelSpec>& specs) {
    SuiteResult result;
    for (const CoxModelSpec& spec : specs) {
        SuiteModelResult slot;
        slot.spec = spec;
        try {
            DesignMatrix m = encode_design(d, spec);
            FitOptions options;
            options.ties = spec.ties;
            CoxFit fit = fit_cox(m, options);
            if (!fit.converged)
                throw EstimationError("did not converge within the iteration limit");
            try {
                slot.ph = ph_test(fit, m);
            } catch (const Error&) {
                // Diagnostic unavailable (e.g. a single event time); the
                // fit itself stands.
            }
            slot.fit = std::move(fit);
        } catch (const Error& e) {
            slot.fit.reset();
            slot.ph.reset();
            slot.error = e.what();
        }
        result.models.push_back(std::move(slot));
    }
    for (const SuiteModelResult& slot : result.models)
        if (slot.fit)
            for (const std::string& label : slot.fit->column_names)
                if (std::find(result.row_labels.begin(), result.row_labels.end(), label) ==
                    result.row_labels.end())
                    result.row_labels.push_back(label);
    return result;
}

std::string render_suite_text(const SuiteResult& r, StarConvention convention) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"covariate"};
    for (const SuiteModelResult& slot : r.models) header.push_back(slot.spec.name);
    rows.push_back(header);

    for (const std::string& label : r.row_labels) {
        std::vector<std::string> row{label};
        for (const SuiteModelResult& slot : r.models) {
            std::string cell;
            if (slot.fit)
                if (auto j = column_of(*slot.fit, label)) {
                    cell = fmt4(slot.fit->coefficients[*j]) +
                           significance_stars(wald_p(*slot.fit, *j), convention) + " (" +
                           fmt4(slot.fit->standard_errors[*j]) + ")";
                }
            row.push_back(cell);
        }
        rows.push_back(row);
    }

    std::vector<std::string> lr{"LR chi2"}, ph{"PH global chi2"}, status{"status"};
    for (const SuiteModelResult& slot : r.models) {
        lr.push_back(slot.fit ? fmt4(slot.fit->lr_stat) : std::string());
        ph.push_back(slot.ph ? fmt4(slot.ph->global.chi_square) : std::string());
        status.push_back(slot.fit ? "ok" : "failed");
    }
    rows.push_back(lr);
    rows.push_back(ph);
    rows.push_back(status);

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string line;
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            std::string cell = rows[i][c];
            cell.resize(width[c], ' ');
            if (c > 0) line += "  ";
            line += cell;
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line;
        out += '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
            out += std::string(total, '-');
            out += '\n';
        }
    }
    out += convention == StarConvention::TableNote
               ? "significance: *** p < 0.001, ** p < 0.05, * p < 0.01\n"
               : "significance: *** p < 0.01, ** p < 0.05, * p < 0.10\n";
    for (const SuiteModelResult& slot : r.models)
        if (!slot.fit) out += slot.spec.name + " failed: " + slot.error + "\n";
    return out;
}

void write_suite_csv(const SuiteResult& r, StarConvention convention, std::ostream& out) {
    out << "covariate,model,coef,se,stars\n";
    for (const std::string& label : r.row_labels)
        for (const SuiteModelResult& slot : r.models) {
            if (!slot.fit) continue;
            auto j = column_of(*slot.fit, label);
            if (!j) continue;
            out << label << ',' << slot.spec.name << ',' << fmt4(slot.fit->coefficients[*j])
                << ',' << fmt4(slot.fit->standard_errors[*j]) << ','
                << significance_stars(wald_p(*slot.fit, *j), convention) << '\n';
        }
}

nlohmann::json suite_json(const SuiteResult& r) {
    nlohmann::json models = nlohmann::json::array();
    for (const SuiteModelResult& slot : r.models) {
        nlohmann::json jm;
        jm["name"] = slot.spec.name;
        if (slot.fit) {
            jm["error"] = nullptr;
            jm["fit"] = fit_report_json(*slot.fit, slot.ph ? &*slot.ph : nullptr);
        } else {
            jm["error"] = slot.error;
            jm["fit"] = nullptr;
        }
        models.push_back(std::move(jm));
    }
    return nlohmann::json{{"models", std::move(models)}};
}

}  // namespace patentsurv

#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "patentsurv/design.hpp"
#include "patentsurv/errors.hpp"
#include "patentsurv/model_suite.hpp"
#include "patentsurv/simulator.hpp"

using namespace patentsurv;

namespace {

Dataset suite_cohort() {
    SimConfig cfg = default_sim_config();
    cfg.n = 1500;
    cfg.seed = 7001;
    return simulate(cfg);
}

}  // namespace

TEST_CASE("significance ladders") {
    SUBCASE("table-note convention: the stringent threshold wins") {
        CHECK(significance_stars(0.0005, StarConvention::TableNote) == "***");
        CHECK(significance_stars(0.005, StarConvention::TableNote) == "*");
        CHECK(significance_stars(0.03, StarConvention::TableNote) == "**");
        CHECK(significance_stars(0.2, StarConvention::TableNote) == "");
        CHECK(significance_stars(0.001, StarConvention::TableNote) == "*");   // boundary
        CHECK(significance_stars(0.05, StarConvention::TableNote) == "");     // boundary
    }
    SUBCASE("conventional ladder") {
        CHECK(significance_stars(0.005, StarConvention::Conventional) == "***");
        CHECK(significance_stars(0.03, StarConvention::Conventional) == "**");
        CHECK(significance_stars(0.07, StarConvention::Conventional) == "*");
        CHECK(significance_stars(0.2, StarConvention::Conventional) == "");
    }
}

TEST_CASE("builtin suite shape") {
    auto specs = builtin_suite();
    REQUIRE(specs.size() == 7);
    CHECK(specs[0].name == "Model 1");
    CHECK(specs[0].covariates == std::vector<std::string>{"DSIR"});
    CHECK(specs[0].tech_dummies.empty());

    const std::vector<std::string> base = {"DSIR", "NC", "NI", "FS", "TS", "OW"};
    const std::vector<std::string> one_tech = {"Electrical", "Instrument", "Chemistry",
                                               "Mechanical", "OtherField"};
    for (std::size_t i = 1; i <= 5; ++i) {
        CHECK(specs[i].name == "Model " + std::to_string(i + 1));
        CHECK(specs[i].covariates == base);
        CHECK(specs[i].tech_dummies == std::vector<std::string>{one_tech[i - 1]});
        CHECK_FALSE(specs[i].all_tech_with_reference);
    }

    CHECK(specs[6].covariates == base);
    CHECK(specs[6].all_tech_with_reference);
    REQUIRE(specs[6].interactions.size() == 1);
    CHECK(specs[6].interactions[0] == std::pair<std::string, std::string>("OW", "DSIR"));
    for (const auto& s : specs) CHECK(s.ties == Ties::Efron);
}

TEST_CASE("suite over a simulated cohort fits every model") {
    Dataset d = suite_cohort();
    SuiteResult r = run_suite(d, builtin_suite());
    REQUIRE(r.models.size() == 7);
    for (const SuiteModelResult& slot : r.models) {
        CAPTURE(slot.spec.name);
        CHECK(slot.error.empty());
        REQUIRE(slot.fit.has_value());
        CHECK(slot.fit->converged);
        CHECK(slot.ph.has_value());
    }

    // Model 1 through the suite is the same fit as calling the estimator
    // directly: identical inputs, bitwise-identical outputs.
    DesignMatrix m1 = encode_design(d, builtin_suite()[0]);
    CoxFit direct = fit_cox(m1);
    CHECK(r.models[0].fit->coefficients == direct.coefficients);
    CHECK(r.models[0].fit->log_pl_fit == direct.log_pl_fit);

    // Row order: first appearance across model columns.
    std::vector<std::string> expected = {"DSIR",       "NC",         "NI",       "FS",
                                         "TS",         "OW",         "Electrical",
                                         "Instrument", "Chemistry",  "Mechanical",
                                         "OtherField", "OW*DSIR"};
    CHECK(r.row_labels == expected);
}

TEST_CASE("suite captures per-model failures without aborting") {
    // Every record in one technology class: the dummies in Models 2-7 are
    // constant columns, so only Model 1 survives.
    Dataset d = suite_cohort();
    for (PatentRecord& rec : d.records) rec.tech = TechField::Chemistry;
    SuiteResult r = run_suite(d, builtin_suite());
    REQUIRE(r.models.size() == 7);
    CHECK(r.models[0].fit.has_value());
    for (std::size_t k = 1; k < 7; ++k) {
        CAPTURE(k);
        CHECK_FALSE(r.models[k].fit.has_value());
        CHECK_FALSE(r.models[k].error.empty());
    }
    CHECK(r.row_labels == std::vector<std::string>{"DSIR"});

    std::string text = render_suite_text(r, StarConvention::TableNote);
    CHECK(text.find("Model 2 failed:") != std::string::npos);
    CHECK(text.find("status") != std::string::npos);
    CHECK(text.find("failed") != std::string::npos);
}

TEST_CASE("rendered grid carries the note and footer rows") {
    Dataset d = suite_cohort();
    SuiteResult r = run_suite(d, builtin_suite());
    std::string text = render_suite_text(r, StarConvention::TableNote);
    CHECK(text.rfind("covariate", 0) == 0);
    CHECK(text.find("Model 7") != std::string::npos);
    CHECK(text.find("LR chi2") != std::string::npos);
    CHECK(text.find("PH global chi2") != std::string::npos);
    CHECK(text.find("significance: *** p < 0.001, ** p < 0.05, * p < 0.01") != std::string::npos);

    std::string conv = render_suite_text(r, StarConvention::Conventional);
    CHECK(conv.find("significance: *** p < 0.01, ** p < 0.05, * p < 0.10") != std::string::npos);

    // No trailing whitespace on any line.
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) CHECK(line.back() != ' ');
}

TEST_CASE("suite CSV rows are covariate x model") {
    Dataset d = suite_cohort();
    SuiteResult r = run_suite(d, builtin_suite());
    std::ostringstream out;
    write_suite_csv(r, StarConvention::TableNote, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "covariate,model,coef,se,stars");

    int rows = 0;
    bool saw_dsir_m1 = false;
    while (std::getline(in, line)) {
        ++rows;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");  // empty stars cell
        REQUIRE(cells.size() == 5);
        CHECK(cells[2].find('.') != std::string::npos);  // %.4f formatting
        CHECK((cells[4] == "" || cells[4] == "*" || cells[4] == "**" || cells[4] == "***"));
        if (cells[0] == "DSIR" && cells[1] == "Model 1") saw_dsir_m1 = true;
    }
    CHECK(saw_dsir_m1);
    // DSIR sits in all 7 models; NC..OW in models 2-7; Instrument only in
    // model 3 (model 7 keeps it as the reference); the other four dummies
    // in two models each; the interaction in model 7 alone.
    CHECK(rows == 7 + 5 * 6 + 1 + 4 * 2 + 1);
}

TEST_CASE("suite reruns are deterministic") {
    Dataset d = suite_cohort();
    SuiteResult a = run_suite(d, builtin_suite());
    SuiteResult b = run_suite(d, builtin_suite());
    CHECK(render_suite_text(a, StarConvention::TableNote) ==
          render_suite_text(b, StarConvention::TableNote));
    CHECK(suite_json(a).dump() == suite_json(b).dump());

    std::ostringstream csv_a, csv_b;
    write_suite_csv(a, StarConvention::Conventional, csv_a);
    write_suite_csv(b, StarConvention::Conventional, csv_b);
    CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("suite JSON separates fits from failures") {
    Dataset d = suite_cohort();
    for (PatentRecord& rec : d.records) rec.tech = TechField::Electrical;
    SuiteResult r = run_suite(d, builtin_suite());
    nlohmann::json j = suite_json(r);
    REQUIRE(j.at("models").size() == 7);
    CHECK(j["models"][0]["name"] == "Model 1");
    CHECK(j["models"][0]["error"].is_null());
    CHECK(j["models"][0]["fit"].is_object());
    CHECK(j["models"][0]["fit"]["covariates"][0] == "DSIR");
    CHECK(j["models"][3]["fit"].is_null());
    CHECK(j["models"][3]["error"].is_string());
}

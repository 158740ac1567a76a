#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "patentsurv/cox.hpp"
#include "patentsurv/dataset.hpp"
#include "patentsurv/model_spec.hpp"

namespace patentsurv {

// Star ladder for coefficient tables. TableNote reproduces the grid's own
// footnote "*** p < 0.001, ** p < 0.05, * p < 0.01" faithfully, with the
// most stringent threshold winning even though the ordering is
// unconventional (* marks a smaller p than **). Conventional is the usual
// 0.01 / 0.05 / 0.10 ladder.
enum class StarConvention { TableNote, Conventional };

std::string significance_stars(double p, StarConvention convention);

struct SuiteModelResult {
    CoxModelSpec spec;
    std::optional<CoxFit> fit;       // empty when the model failed
    std::optional<PhTestResult> ph;  // empty when the diagnostic was unavailable
    std::string error;               // failure description when fit is empty
};

struct SuiteResult {
    std::vector<SuiteModelResult> models;
    // Union of fitted covariate labels in first-appearance order across
    // model columns; fixes the grid's row order.
    std::vector<std::string> row_labels;
};

// The seven builtin regressions: Model 1 is DSIR alone; Models 2-6 add the
// five patent characteristics (NC, NI, FS, TS, OW) plus one technology
// dummy each (Electrical, Instrument, Chemistry, Mechanical, OtherField);
// Model 7 carries all technology dummies with Instruments as the reference
// category plus the OW*DSIR interaction. All use Efron ties.
std::vector<CoxModelSpec> builtin_suite();

// Fits every spec independently; a model that cannot be encoded, is not
// identifiable, or fails to converge is captured in its slot with an error
// message instead of aborting the suite. The PH diagnostic is attached
// where available.
SuiteResult run_suite(const Dataset& d, const std::vector<CoxModelSpec>& specs);

// Plain-text coefficient grid: one column per model, cells rendered as
// "coef stars (se)" with 4 decimals, footer rows for the LR and global PH
// statistics, and the significance note. Pure function of the result.
std::string render_suite_text(const SuiteResult& r, StarConvention convention);

// Machine-comparable rows: covariate,model,coef,se,stars (fitted models only).
void write_suite_csv(const SuiteResult& r, StarConvention convention, std::ostream& out);

// Every fit in full precision, with per-model error slots.
nlohmann::json suite_json(const SuiteResult& r);

}  // namespace patentsurv

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patentsurv/dataset.hpp"

namespace patentsurv {

// Product-limit step function over the retained event times. Rows exist
// only at times with at least one event; censoring-only times thin the
// risk set but add no row. Entries with an undefined Greenwood band
// (the curve reached zero) carry NaN in se/ci_low/ci_high.
struct SurvivalCurve {
    std::string group_label;  // "all", "dsir=1", "tech=chemistry", ...
    std::vector<int> times;
    std::vector<int> n_risk;
    std::vector<int> n_events;
    std::vector<double> estimate;
    std::vector<double> greenwood_se;
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    double band_level = 0.95;

    std::size_t size() const { return times.size(); }
    // Smallest retained time with S(t) <= 0.5, or nullopt ("not reached").
    std::optional<int> median_survival() const;
};

// Kaplan-Meier estimates, one curve per group ("" = single pooled curve).
// group_by accepts dsir, ow or tech; groups are the values observed in
// the data. Ties within a year are resolved events-before-censoring: a
// record censored at t stays in the risk set for events at t. Bands are
// populated at the default 95% level.
std::vector<SurvivalCurve> fit_km(const Dataset& d, const std::string& group_by = "");

// Returns a copy of the curve with the Greenwood standard error and a
// log(-log) scale confidence band at the given level. The transform
// keeps the band inside [0,1]; where the curve hits zero the band is
// undefined and the entries are NaN.
SurvivalCurve greenwood_band(const SurvivalCurve& curve, double level);

// Plot-ready export: group,time,n_risk,n_events,survival,se,ci_low,ci_high
// with one block per curve. NaN band entries are written as empty cells.
void write_curves_csv(const std::vector<SurvivalCurve>& curves, std::ostream& out);

}  // namespace patentsurv

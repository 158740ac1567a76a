#include "patentsurv/design.hpp"

#include <algorithm>
#include <unordered_set>

#include "patentsurv/errors.hpp"

namespace patentsurv {

namespace {

const char* kBaseLabels[] = {"DSIR", "NC", "NI", "FS", "TS", "OW"};
const char* kDummyLabels[] = {"Electrical", "Instrument", "Chemistry", "Mechanical", "OtherField"};

bool is_base_label(const std::string& s) {
    return std::find(std::begin(kBaseLabels), std::end(kBaseLabels), s) != std::end(kBaseLabels);
}

bool is_dummy_label(const std::string& s) {
    return std::find(std::begin(kDummyLabels), std::end(kDummyLabels), s) != std::end(kDummyLabels);
}

}  // namespace

std::string ties_to_string(Ties t) {
    return t == Ties::Breslow ? "breslow" : "efron";
}

Ties ties_from_string(const std::string& s) {
    if (s == "breslow") return Ties::Breslow;
    if (s == "efron") return Ties::Efron;
    throw ConfigError("unknown ties rule '" + s + "' (expected breslow or efron)");
}

DesignMatrix encode_design(const Dataset& d, const CoxModelSpec& spec) {
    if (d.empty()) throw EstimationError("cannot encode an empty dataset");
    ValidationReport report = validate(d);
    if (!report.ok())
        throw EstimationError("dataset invalid: row " + std::to_string(report.issues[0].row) +
                              ": " + report.issues[0].message);

    // Resolve the column plan first so errors mention spec labels, not data.
    std::vector<std::string> plain;  // base covariates + dummies, pre-interaction
    std::unordered_set<std::string> used;
    auto add_column = [&](const std::string& raw, bool base_only) {
        auto canon = canonical_covariate_label(raw);
        if (!canon) throw ConfigError("unknown covariate '" + raw + "'");
        if (base_only && !is_base_label(*canon))
            throw ConfigError("'" + raw + "' is not a base covariate");
        if (!base_only && !is_dummy_label(*canon))
            throw ConfigError("'" + raw + "' is not a technology dummy");
        if (!used.insert(*canon).second)
            throw ConfigError("covariate '" + *canon + "' listed twice");
        plain.push_back(*canon);
    };
    for (const std::string& c : spec.covariates) add_column(c, true);
    if (spec.all_tech_with_reference) {
        // Instruments is the omitted reference category.
        for (const char* dummy : {"Electrical", "Chemistry", "Mechanical", "OtherField"})
            add_column(dummy, false);
    } else {
        for (const std::string& c : spec.tech_dummies) add_column(c, false);
    }

    struct InteractionPlan {
        std::string name;
        std::size_t left, right;  // indices into plain columns
    };
    std::vector<InteractionPlan> interactions;
    for (const auto& [a, b] : spec.interactions) {
        auto ca = canonical_covariate_label(a);
        auto cb = canonical_covariate_label(b);
        if (!ca || !cb)
            throw ConfigError("unknown covariate in interaction '" + a + "*" + b + "'");
        auto find = [&](const std::string& label) {
            auto it = std::find(plain.begin(), plain.end(), label);
            if (it == plain.end())
                throw ConfigError("interaction parent '" + label +
                                  "' is not among the model's covariates");
            return static_cast<std::size_t>(it - plain.begin());
        };
        InteractionPlan plan{*ca + "*" + *cb, find(*ca), find(*cb)};
        if (!used.insert(plan.name).second)
            throw ConfigError("interaction '" + plan.name + "' listed twice");
        interactions.push_back(std::move(plan));
    }

    DesignMatrix m;
    m.column_names = plain;
    for (const InteractionPlan& p : interactions) m.column_names.push_back(p.name);

    const std::size_t n = d.size();
    const std::size_t p = m.column_names.size();
    m.values.resize(n * p);
    m.times.resize(n);
    m.events.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PatentRecord& r = d.records[i];
        double* row = m.values.data() + i * p;
        for (std::size_t j = 0; j < plain.size(); ++j) row[j] = *covariate_value(r, plain[j]);
        for (std::size_t k = 0; k < interactions.size(); ++k)
            row[plain.size() + k] = row[interactions[k].left] * row[interactions[k].right];
        m.times[i] = r.survival_years;
        m.events[i] = r.event;
    }

    // Constant columns are unidentifiable in a partial likelihood.
    for (std::size_t j = 0; j < p; ++j) {
        double lo = m.at(0, j), hi = lo;
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, m.at(i, j));
            hi = std::max(hi, m.at(i, j));
        }
        if (lo == hi)
            throw IdentifiabilityError("column '" + m.column_names[j] +
                                       "' is constant across all records");
    }
    return m;
}

}  // namespace patentsurv

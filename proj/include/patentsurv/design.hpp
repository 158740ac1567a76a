#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "patentsurv/dataset.hpp"
#include "patentsurv/model_spec.hpp"

namespace patentsurv {

// Numeric design for one regression: covariate rows plus the duration
// and event columns the partial likelihood needs. Immutable once built.
struct DesignMatrix {
    std::vector<std::string> column_names;
    std::vector<double> values;  // row-major, rows() x cols()
    std::vector<int> times;      // survival_years per record
    std::vector<int> events;     // 0/1 per record

    std::size_t rows() const { return times.size(); }
    std::size_t cols() const { return column_names.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
};

// Encodes a model spec over a dataset. Column order is: base covariates
// in spec order, then technology dummies (reference-category encoded),
// then interaction products. Deterministic: identical inputs give a
// bit-identical matrix.
//
// Throws ConfigError for unknown labels or interaction parents that are
// not listed covariates; IdentifiabilityError if any encoded column is
// constant across the dataset; EstimationError for an empty or invalid
// dataset.
DesignMatrix encode_design(const Dataset& d, const CoxModelSpec& spec);

}  // namespace patentsurv

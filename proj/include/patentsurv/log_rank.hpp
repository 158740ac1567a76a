#pragma once

#include <string>
#include <vector>

#include "patentsurv/dataset.hpp"

namespace patentsurv {

struct LogRankGroup {
    std::string label;
    double observed = 0.0;  // events seen in the group
    double expected = 0.0;  // events expected under a shared hazard
};

struct LogRankResult {
    std::vector<LogRankGroup> per_group;
    double chi_square = 0.0;
    int df = 0;  // groups - 1
    double p_value = 1.0;
};

// k-sample log-rank comparison of survival across the groups of a 0/1
// covariate (dsir, ow) or the technology category. At each event time the
// expected events per group are d_j * n_gj / n_j with the hypergeometric
// variance; the statistic is the quadratic form of the first k-1 (O - E)
// entries in their covariance, which for two groups reduces to the familiar
// (sum(O - E))^2 / sum(Var). Ties follow the same events-before-censoring
// convention as the product-limit estimator.
//
// Requires at least one event; a degenerate covariance (some group shares
// no risk time with the rest) is an estimation error.
LogRankResult log_rank_test(const Dataset& d, const std::string& group_by);

}  // namespace patentsurv

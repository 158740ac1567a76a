#pragma once

// Internal helper shared by the product-limit estimator and the log-rank
// test: splits a dataset's (duration, event) pairs by a grouping covariate.

#include <string>
#include <utility>
#include <vector>

#include "patentsurv/dataset.hpp"

namespace patentsurv::detail {

struct GroupedDurations {
    std::string label;                      // "dsir=0", "tech=chemistry", ...
    std::vector<std::pair<int, int>> obs;   // (survival_years, event)
};

// Group set is the covariate's full domain: {0,1} for dsir/ow, the five
// technology fields for tech, or the single pooled group "all" when
// group_by is empty. Order is fixed (0 before 1; tech in chemistry,
// electrical, mechanical, instruments, other order). The dataset must both
// validate and populate every group; an empty group is an estimation error
// naming the group. Unknown covariates are a config error.
std::vector<GroupedDurations> split_groups(const Dataset& d, const std::string& group_by);

}  // namespace patentsurv::detail

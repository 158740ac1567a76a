#include "patentsurv/log_rank.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "grouping.hpp"
#include "patentsurv/errors.hpp"
#include "patentsurv/numerics.hpp"

namespace patentsurv {

LogRankResult log_rank_test(const Dataset& d, const std::string& group_by) {
    if (group_by.empty())
        throw ConfigError("log-rank test needs a grouping covariate (dsir, ow or tech)");
    auto groups = detail::split_groups(d, group_by);
    std::size_t k = groups.size();

    // Per-group tallies by year, plus the pooled event times.
    struct Cell {
        int events = 0;
        int total = 0;  // records leaving the risk set at this year
    };
    std::vector<std::map<int, Cell>> tally(k);
    std::set<int> event_times;
    for (std::size_t g = 0; g < k; ++g)
        for (auto [t, e] : groups[g].obs) {
            Cell& c = tally[g][t];
            ++c.total;
            if (e == 1) {
                ++c.events;
                event_times.insert(t);
            }
        }
    if (event_times.empty())
        throw EstimationError("log-rank test is undefined on a dataset with no events");

    LogRankResult res;
    res.df = static_cast<int>(k) - 1;
    for (const auto& g : groups) res.per_group.push_back({g.label, 0.0, 0.0});

    // Sweep event times in order, maintaining per-group at-risk counts.
    std::vector<double> at_risk(k);
    std::vector<std::map<int, Cell>::const_iterator> next(k);
    for (std::size_t g = 0; g < k; ++g) {
        at_risk[g] = static_cast<double>(groups[g].obs.size());
        next[g] = tally[g].begin();
    }
    SymmetricMatrix var(k - 1);
    std::vector<double> events_here(k);
    for (int t : event_times) {
        double n_total = 0.0;
        double d_total = 0.0;
        for (std::size_t g = 0; g < k; ++g) {
            while (next[g] != tally[g].end() && next[g]->first < t) {
                at_risk[g] -= next[g]->second.total;
                ++next[g];
            }
            events_here[g] = (next[g] != tally[g].end() && next[g]->first == t)
                                 ? next[g]->second.events
                                 : 0.0;
            n_total += at_risk[g];
            d_total += events_here[g];
        }
        for (std::size_t g = 0; g < k; ++g) {
            res.per_group[g].observed += events_here[g];
            res.per_group[g].expected += d_total * at_risk[g] / n_total;
        }
        // Hypergeometric covariance of the event split; a risk set of one
        // contributes nothing (its split is deterministic).
        if (n_total > 1.0) {
            double scale = d_total * (n_total - d_total) / (n_total - 1.0);
            for (std::size_t g = 0; g + 1 < k; ++g) {
                double pg = at_risk[g] / n_total;
                var.add(g, g, scale * pg * (1.0 - pg));
                for (std::size_t h = g + 1; h + 1 < k; ++h)
                    var.add(g, h, -scale * pg * at_risk[h] / n_total);
            }
        }
    }

    std::vector<double> diff(k - 1);
    for (std::size_t g = 0; g + 1 < k; ++g)
        diff[g] = res.per_group[g].observed - res.per_group[g].expected;
    // Observed == expected everywhere means the statistic is zero no matter
    // what the covariance looks like; skipping the solve keeps perfectly
    // exchangeable groups (which can have a degenerate covariance) exact.
    if (std::all_of(diff.begin(), diff.end(), [](double v) { return v == 0.0; })) {
        res.chi_square = 0.0;
        res.p_value = 1.0;
        return res;
    }
    std::vector<double> solved;
    try {
        solved = solve_spd(var, diff);
    } catch (const IdentifiabilityError&) {
        throw EstimationError(
            "log-rank variance is singular: some group shares no risk time with the others");
    }
    double chi = 0.0;
    for (std::size_t g = 0; g + 1 < k; ++g) chi += diff[g] * solved[g];
    res.chi_square = std::max(chi, 0.0);
    res.p_value = chi_square_sf(res.chi_square, res.df);
    return res;
}

}  // namespace patentsurv

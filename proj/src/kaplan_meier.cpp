#include "patentsurv/kaplan_meier.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

#include "grouping.hpp"
#include "patentsurv/errors.hpp"
#include "patentsurv/numerics.hpp"

namespace patentsurv {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

SurvivalCurve km_one_group(const std::string& label,
                           const std::vector<std::pair<int, int>>& obs) {
    // Aggregate events and censorings per year; the risk set just before t
    // counts every record with time >= t (censored-at-t included).
    std::map<int, std::pair<int, int>> per_time;  // time -> (events, censored)
    for (auto [t, e] : obs) {
        auto& cell = per_time[t];
        if (e == 1)
            ++cell.first;
        else
            ++cell.second;
    }
    SurvivalCurve curve;
    curve.group_label = label;
    int at_risk = static_cast<int>(obs.size());
    double surv = 1.0;
    for (auto [t, counts] : per_time) {
        auto [d, c] = counts;
        if (d > 0) {
            surv *= 1.0 - static_cast<double>(d) / at_risk;
            curve.times.push_back(t);
            curve.n_risk.push_back(at_risk);
            curve.n_events.push_back(d);
            curve.estimate.push_back(surv);
        }
        at_risk -= d + c;
    }
    curve.greenwood_se.assign(curve.size(), 0.0);
    curve.ci_low = curve.estimate;
    curve.ci_high = curve.estimate;
    return curve;
}

}  // namespace

std::optional<int> SurvivalCurve::median_survival() const {
    for (std::size_t j = 0; j < size(); ++j)
        if (estimate[j] <= 0.5) return times[j];
    return std::nullopt;
}

std::vector<SurvivalCurve> fit_km(const Dataset& d, const std::string& group_by) {
    std::vector<SurvivalCurve> curves;
    for (const auto& g : detail::split_groups(d, group_by))
        curves.push_back(greenwood_band(km_one_group(g.label, g.obs), 0.95));
    return curves;
}

SurvivalCurve greenwood_band(const SurvivalCurve& curve, double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must be in (0,1)");
    SurvivalCurve out = curve;
    out.band_level = level;
    double z = normal_quantile(0.5 * (1.0 + level));
    double greenwood_sum = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
        double n = out.n_risk[j];
        double d = out.n_events[j];
        double s = out.estimate[j];
        if (d >= n) {
            // The curve hit zero: the variance term diverges and the band
            // is undefined from this point on.
            out.greenwood_se[j] = kNaN;
            out.ci_low[j] = kNaN;
            out.ci_high[j] = kNaN;
            continue;
        }
        greenwood_sum += d / (n * (n - d));
        double se = s * std::sqrt(greenwood_sum);
        out.greenwood_se[j] = se;
        // Band on the log(-log S) scale, mapped back as S^exp(+-z se_theta),
        // which keeps both ends inside [0,1].
        double se_theta = se / (s * std::fabs(std::log(s)));
        out.ci_low[j] = std::pow(s, std::exp(z * se_theta));
        out.ci_high[j] = std::pow(s, std::exp(-z * se_theta));
    }
    return out;
}

void write_curves_csv(const std::vector<SurvivalCurve>& curves, std::ostream& out) {
    auto cell = [&](double v) {
        if (std::isnan(v)) return std::string();
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    out << "group,time,n_risk,n_events,survival,se,ci_low,ci_high\n";
    for (const SurvivalCurve& c : curves)
        for (std::size_t j = 0; j < c.size(); ++j)
            out << c.group_label << ',' << c.times[j] << ',' << c.n_risk[j] << ','
                << c.n_events[j] << ',' << cell(c.estimate[j]) << ',' << cell(c.greenwood_se[j])
                << ',' << cell(c.ci_low[j]) << ',' << cell(c.ci_high[j]) << '\n';
}

}  // namespace patentsurv

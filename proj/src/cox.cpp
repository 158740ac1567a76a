#include "patentsurv/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "patentsurv/errors.hpp"

namespace patentsurv {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Fixed reduction order: time ascending, events before censorings within a
// year, then lexicographic covariate rows. Every accumulation below walks
// this order, so permuting the input rows reproduces results bit for bit.
std::vector<std::size_t> canonical_order(const DesignMatrix& m) {
    std::vector<std::size_t> order(m.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (m.times[a] != m.times[b]) return m.times[a] < m.times[b];
        if (m.events[a] != m.events[b]) return m.events[a] > m.events[b];
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m.at(a, j) != m.at(b, j)) return m.at(a, j) < m.at(b, j);
        return false;
    });
    return order;
}

// Running risk-set sums of w_i = exp(eta_i - shift) and its x-weighted
// moments. The shift tracks the largest eta seen so far; the risk set only
// grows as time sweeps backward, so a shift change rescales the running
// sums by exp(old - new) <= 1 and exponentials never overflow.
struct RiskSums {
    RiskSums(std::size_t p, bool with_moments)
        : full(with_moments), s1(with_moments ? p : 0, 0.0), s2(with_moments ? p : 0) {}

    void add(const DesignMatrix& m, std::size_t row, double eta) {
        if (eta > shift) {
            double r = std::exp(shift - eta);
            s0 *= r;
            if (full) {
                for (double& v : s1) v *= r;
                s2.scale(r);
            }
            shift = eta;
        }
        double w = std::exp(eta - shift);
        s0 += w;
        if (full) {
            for (std::size_t a = 0; a < s1.size(); ++a) {
                double xa = m.at(row, a);
                s1[a] += w * xa;
                for (std::size_t b = a; b < s1.size(); ++b) s2.add(a, b, w * xa * m.at(row, b));
            }
        }
    }

    bool full;
    double shift = -kInf;
    double s0 = 0.0;
    std::vector<double> s1;
    SymmetricMatrix s2;
};

// Per-event-time pieces of the partial likelihood derivatives. The score
// contribution is death_x - expected (the aggregated Schoenfeld residual);
// info is the information contribution at that time.
struct EventBlock {
    int time = 0;
    int deaths = 0;
    double s0 = 0.0;     // sum_risk exp(eta - shift), for the baseline
    double shift = 0.0;  // the risk set's max eta
    std::vector<double> death_x;
    std::vector<double> expected;
    SymmetricMatrix info;
};

// Shared reduction over risk sets, processed in descending time so each
// risk set extends the previous one. Always returns the log partial
// likelihood (possibly non-finite; callers decide whether to throw). When
// blocks is non-null, also emits the per-event-time derivative pieces in
// ascending time order.
double walk_risk_sets(const DesignMatrix& m, const std::vector<double>& b, Ties ties,
                      std::vector<EventBlock>* blocks) {
    std::size_t n = m.rows();
    std::size_t p = m.cols();
    if (b.size() != p)
        throw ConfigError("coefficient count " + std::to_string(b.size()) +
                          " does not match the design's " + std::to_string(p) + " columns");
    const bool full = blocks != nullptr;
    if (full) blocks->clear();

    std::vector<std::size_t> order = canonical_order(m);
    std::vector<double> eta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) eta[i] += m.at(i, j) * b[j];

    RiskSums risk(p, full);
    std::vector<double> s1d(full ? p : 0), z(full ? p : 0);
    SymmetricMatrix s2d;
    double logl = 0.0;

    std::size_t hi = n;
    while (hi > 0) {
        std::size_t lo = hi - 1;
        int t = m.times[order[lo]];
        while (lo > 0 && m.times[order[lo - 1]] == t) --lo;
        for (std::size_t r = lo; r < hi; ++r) risk.add(m, order[r], eta[order[r]]);

        // Canonical order puts the deaths at the front of the year block.
        std::size_t d_end = lo;
        while (d_end < hi && m.events[order[d_end]] == 1) ++d_end;
        std::size_t d = d_end - lo;
        if (d > 0) {
            double sum_eta = 0.0;
            double s0d = 0.0;
            EventBlock blk;
            if (full) {
                std::fill(s1d.begin(), s1d.end(), 0.0);
                s2d = SymmetricMatrix(p);
                blk.time = t;
                blk.deaths = static_cast<int>(d);
                blk.death_x.assign(p, 0.0);
                blk.expected.assign(p, 0.0);
                blk.info = SymmetricMatrix(p);
                blk.s0 = risk.s0;
                blk.shift = risk.shift;
            }
            for (std::size_t r = lo; r < d_end; ++r) {
                std::size_t row = order[r];
                sum_eta += eta[row];
                double w = std::exp(eta[row] - risk.shift);
                s0d += w;
                if (full)
                    for (std::size_t a = 0; a < p; ++a) {
                        double xa = m.at(row, a);
                        blk.death_x[a] += xa;
                        s1d[a] += w * xa;
                        for (std::size_t c = a; c < p; ++c) s2d.add(a, c, w * xa * m.at(row, c));
                    }
            }
            logl += sum_eta;
            if (ties == Ties::Breslow || d == 1) {
                logl -= static_cast<double>(d) * (std::log(risk.s0) + risk.shift);
                if (full) {
                    for (std::size_t a = 0; a < p; ++a) z[a] = risk.s1[a] / risk.s0;
                    for (std::size_t a = 0; a < p; ++a) {
                        blk.expected[a] = static_cast<double>(d) * z[a];
                        for (std::size_t c = a; c < p; ++c)
                            blk.info.add(a, c, static_cast<double>(d) *
                                                   (risk.s2(a, c) / risk.s0 - z[a] * z[c]));
                    }
                }
            } else {
                // Efron: the deaths' own mass leaves the denominator in
                // d equal slices.
                for (std::size_t k = 0; k < d; ++k) {
                    double f = static_cast<double>(k) / static_cast<double>(d);
                    double denom = risk.s0 - f * s0d;
                    logl -= std::log(denom) + risk.shift;
                    if (full) {
                        for (std::size_t a = 0; a < p; ++a) z[a] = (risk.s1[a] - f * s1d[a]) / denom;
                        for (std::size_t a = 0; a < p; ++a) {
                            blk.expected[a] += z[a];
                            for (std::size_t c = a; c < p; ++c)
                                blk.info.add(a, c,
                                             (risk.s2(a, c) - f * s2d(a, c)) / denom - z[a] * z[c]);
                        }
                    }
                }
            }
            if (full) blocks->push_back(std::move(blk));
        }
        hi = lo;
    }
    if (full) std::reverse(blocks->begin(), blocks->end());
    return logl;
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

ScoreInfo collapse_blocks(std::size_t p, const std::vector<EventBlock>& blocks) {
    ScoreInfo out{std::vector<double>(p, 0.0), SymmetricMatrix(p)};
    for (const EventBlock& blk : blocks)
        for (std::size_t a = 0; a < p; ++a) {
            out.score[a] += blk.death_x[a] - blk.expected[a];
            for (std::size_t c = a; c < p; ++c) out.information.add(a, c, blk.info(a, c));
        }
    return out;
}

BaselineHazard baseline_from_blocks(const std::vector<EventBlock>& blocks) {
    BaselineHazard base;
    double cum = 0.0;
    for (const EventBlock& blk : blocks) {
        double d = static_cast<double>(blk.deaths);
        // The direct ratio is exact when the shift is benign (in particular
        // d_j / n_j at b = 0); fall back to logs for extreme predictors.
        double inc = std::fabs(blk.shift) < 500.0
                         ? d / (blk.s0 * std::exp(blk.shift))
                         : std::exp(std::log(d) - std::log(blk.s0) - blk.shift);
        base.times.push_back(blk.time);
        base.increment.push_back(inc);
        cum += inc;
        base.cumulative.push_back(cum);
    }
    return base;
}

}  // namespace

double log_partial_likelihood(const DesignMatrix& m, const std::vector<double>& b, Ties ties) {
    double v = walk_risk_sets(m, b, ties, nullptr);
    if (!std::isfinite(v))
        throw EstimationError("partial likelihood evaluated to a non-finite value");
    return v;
}

ScoreInfo score_and_information(const DesignMatrix& m, const std::vector<double>& b, Ties ties) {
    std::vector<EventBlock> blocks;
    double v = walk_risk_sets(m, b, ties, &blocks);
    if (!std::isfinite(v))
        throw EstimationError("partial likelihood evaluated to a non-finite value");
    return collapse_blocks(m.cols(), blocks);
}

CoxFit fit_cox(const DesignMatrix& m, const FitOptions& options) {
    if (!(options.tol > 0.0)) throw ConfigError("fit tolerance must be positive");
    if (options.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    int total_events = 0;
    for (int e : m.events) total_events += e;
    if (total_events == 0) throw EstimationError("cannot fit a hazard model with no events");

    std::size_t p = m.cols();
    CoxFit fit;
    fit.column_names = m.column_names;
    fit.ties = options.ties;

    std::vector<double> b(p, 0.0);
    std::vector<EventBlock> blocks;
    double lpl = walk_risk_sets(m, b, options.ties, &blocks);
    if (!std::isfinite(lpl))
        throw EstimationError("partial likelihood evaluated to a non-finite value");
    fit.log_pl_null = lpl;

    ScoreInfo si = collapse_blocks(p, blocks);
    double last_change = 0.0;  // lets a zero-score start converge immediately
    for (;;) {
        double scale = options.tol * (1.0 + std::fabs(lpl));
        if (l2_norm(si.score) < scale && std::fabs(last_change) < scale) {
            fit.converged = true;
            break;
        }
        if (fit.iterations >= options.max_iter) break;

        std::vector<double> step = CholeskyFactor(si.information).solve(si.score);
        std::vector<double> b_next(p);
        for (std::size_t j = 0; j < p; ++j) b_next[j] = b[j] + step[j];
        double lpl_next = walk_risk_sets(m, b_next, options.ties, nullptr);
        if (std::isfinite(lpl_next) && std::fabs(lpl_next - lpl) <= scale) {
            // A full Newton step that moves the likelihood by less than the
            // tolerance only sharpens the root (the apparent change is at
            // the likelihood's own resolution), so take it and finish. This
            // is the only exit once steps stop being certifiable as strict
            // improvements in double precision.
            b = b_next;
            ++fit.iterations;
            lpl = walk_risk_sets(m, b, options.ties, &blocks);
            si = collapse_blocks(p, blocks);
            fit.converged = true;
            break;
        }
        double step_scale = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40 && !accepted; ++halving) {
            for (std::size_t j = 0; j < p; ++j) b_next[j] = b[j] + step_scale * step[j];
            lpl_next = walk_risk_sets(m, b_next, options.ties, nullptr);
            if (std::isfinite(lpl_next) && lpl_next > lpl)
                accepted = true;
            else
                step_scale *= 0.5;
        }
        if (!accepted) {
            // No representable improvement along the Newton direction. When
            // the quadratic model itself promises at most an ulp-level gain,
            // this is the optimum double precision can express, even if the
            // raw score threshold is stricter than the log likelihood's
            // resolution; otherwise honor the converged flag's contract.
            double predicted_gain = 0.0;
            for (std::size_t j = 0; j < p; ++j) predicted_gain += si.score[j] * step[j];
            predicted_gain *= 0.5;
            double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(lpl));
            fit.converged = l2_norm(si.score) < scale || predicted_gain <= noise;
            break;
        }
        last_change = lpl_next - lpl;
        b = b_next;
        ++fit.iterations;
        lpl = walk_risk_sets(m, b, options.ties, &blocks);
        si = collapse_blocks(p, blocks);
    }

    fit.coefficients = b;
    fit.log_pl_fit = lpl;
    fit.covariance = CholeskyFactor(si.information).inverse();
    fit.standard_errors.resize(p);
    fit.hazard_ratios.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        fit.standard_errors[j] = std::sqrt(fit.covariance(j, j));
        fit.hazard_ratios[j] = std::exp(b[j]);
    }
    fit.lr_stat = 2.0 * (fit.log_pl_fit - fit.log_pl_null);
    fit.lr_df = static_cast<int>(p);
    fit.lr_p = p == 0 ? 1.0 : chi_square_sf(fit.lr_stat, fit.lr_df);
    fit.baseline = baseline_from_blocks(blocks);
    return fit;
}

std::vector<HazardRow> hazard_ratio_table(const CoxFit& fit) {
    if (!fit.converged) throw EstimationError("hazard ratios require a converged fit");
    std::vector<HazardRow> rows(fit.coefficients.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
        HazardRow& r = rows[j];
        r.label = fit.column_names[j];
        r.coef = fit.coefficients[j];
        r.se = fit.standard_errors[j];
        r.hazard_ratio = fit.hazard_ratios[j];
        double zstat = r.coef / r.se;
        r.wald_p = chi_square_sf(zstat * zstat, 1);
    }
    return rows;
}

BaselineHazard breslow_baseline(const CoxFit& fit, const DesignMatrix& m) {
    if (!fit.converged) throw EstimationError("the baseline hazard requires a converged fit");
    if (fit.column_names != m.column_names)
        throw ConfigError("fit and design matrix do not describe the same model");
    std::vector<EventBlock> blocks;
    walk_risk_sets(m, fit.coefficients, fit.ties, &blocks);
    return baseline_from_blocks(blocks);
}

PhTestResult ph_test(const CoxFit& fit, const DesignMatrix& m) {
    if (!fit.converged)
        throw EstimationError("the proportional-hazards test requires a converged fit");
    if (fit.column_names != m.column_names)
        throw ConfigError("fit and design matrix do not describe the same model");
    std::size_t p = m.cols();
    if (p == 0)
        throw EstimationError("the proportional-hazards test needs at least one covariate");

    std::vector<EventBlock> blocks;
    walk_risk_sets(m, fit.coefficients, fit.ties, &blocks);
    if (blocks.size() < 2)
        throw EstimationError(
            "the proportional-hazards test needs at least two distinct event times");

    // Score test for a linear-in-time drift of each coefficient: extend the
    // model with x * g(t), g(t) = t centered at the event-weighted mean, and
    // test the extension at zero. u is the g-weighted Schoenfeld residual
    // sum; its variance is the Schur complement C = B - A' I^-1 A.
    double total_deaths = 0.0;
    double gbar = 0.0;
    for (const EventBlock& blk : blocks) {
        total_deaths += blk.deaths;
        gbar += blk.deaths * static_cast<double>(blk.time);
    }
    gbar /= total_deaths;

    std::vector<double> u(p, 0.0);
    SymmetricMatrix isum(p), amat(p), bmat(p);
    for (const EventBlock& blk : blocks) {
        double g = static_cast<double>(blk.time) - gbar;
        for (std::size_t a = 0; a < p; ++a) {
            u[a] += g * (blk.death_x[a] - blk.expected[a]);
            for (std::size_t c = a; c < p; ++c) {
                double v = blk.info(a, c);
                isum.add(a, c, v);
                amat.add(a, c, g * v);
                bmat.add(a, c, g * g * v);
            }
        }
    }

    CholeskyFactor ichol(isum);
    std::vector<std::vector<double>> w(p);  // w[c] = I^-1 * (column c of A)
    std::vector<double> col(p);
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t r = 0; r < p; ++r) col[r] = amat(r, c);
        w[c] = ichol.solve(col);
    }
    SymmetricMatrix cmat(p);
    for (std::size_t q = 0; q < p; ++q)
        for (std::size_t r = q; r < p; ++r) {
            double dot = 0.0;
            for (std::size_t s = 0; s < p; ++s) dot += amat(s, q) * w[r][s];
            cmat.set(q, r, bmat(q, r) - dot);
        }

    PhTestResult res;
    for (std::size_t q = 0; q < p; ++q) {
        double denom = cmat(q, q);
        if (!(denom > 0.0))
            throw EstimationError("proportional-hazards test variance for '" +
                                  fit.column_names[q] + "' is not positive");
        double stat = u[q] * u[q] / denom;
        res.per_covariate.push_back({fit.column_names[q], stat, 1, chi_square_sf(stat, 1)});
    }
    std::vector<double> solved;
    try {
        solved = solve_spd(cmat, u);
    } catch (const IdentifiabilityError&) {
        throw EstimationError("proportional-hazards test variance matrix is singular");
    }
    double global = 0.0;
    for (std::size_t q = 0; q < p; ++q) global += u[q] * solved[q];
    global = std::max(global, 0.0);
    res.global = {"GLOBAL", global, static_cast<int>(p), chi_square_sf(global, static_cast<int>(p))};
    return res;
}

nlohmann::json fit_report_json(const CoxFit& fit, const PhTestResult* ph) {
    nlohmann::json j;
    j["covariates"] = fit.column_names;
    j["coefficients"] = fit.coefficients;
    j["standard_errors"] = fit.standard_errors;
    j["hazard_ratios"] = fit.hazard_ratios;
    std::vector<double> pvals;
    for (std::size_t q = 0; q < fit.coefficients.size(); ++q) {
        double zstat = fit.coefficients[q] / fit.standard_errors[q];
        pvals.push_back(chi_square_sf(zstat * zstat, 1));
    }
    j["p_values"] = pvals;
    j["log_pl"] = fit.log_pl_fit;
    j["log_pl_null"] = fit.log_pl_null;
    j["lr"] = {{"stat", fit.lr_stat}, {"df", fit.lr_df}, {"p", fit.lr_p}};
    if (ph) {
        nlohmann::json per = nlohmann::json::array();
        for (const PhCovariateTest& t : ph->per_covariate)
            per.push_back(
                {{"covariate", t.label}, {"chi_square", t.chi_square}, {"df", t.df}, {"p", t.p_value}});
        j["ph_test"] = {{"per_covariate", per},
                        {"global",
                         {{"chi_square", ph->global.chi_square},
                          {"df", ph->global.df},
                          {"p", ph->global.p_value}}}};
    } else {
        j["ph_test"] = nullptr;
    }
    j["baseline"] = {{"time", fit.baseline.times},
                     {"increment", fit.baseline.increment},
                     {"cumulative", fit.baseline.cumulative}};
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["ties"] = ties_to_string(fit.ties);
    return j;
}

}  // namespace patentsurv

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "patentsurv/design.hpp"
#include "patentsurv/model_spec.hpp"
#include "patentsurv/numerics.hpp"

namespace patentsurv {

struct FitOptions {
    Ties ties = Ties::Efron;
    // Converged when the relative log-PL change and the score norm both
    // drop below tol * (1 + |log PL|).
    double tol = 1e-9;
    int max_iter = 100;
};

// Baseline cumulative hazard on the fitted event-time grid; the predicted
// survival for covariate vector x is exp(-H0(t) * exp(x.b)).
struct BaselineHazard {
    std::vector<int> times;          // ascending event years
    std::vector<double> increment;   // h0(t_j) = d_j / sum_risk exp(x.b)
    std::vector<double> cumulative;  // H0(t_j), running sum
};

struct CoxFit {
    std::vector<std::string> column_names;  // design labels, coefficient order
    Ties ties = Ties::Efron;
    std::vector<double> coefficients;
    SymmetricMatrix covariance;  // inverse observed information at the optimum
    std::vector<double> standard_errors;
    std::vector<double> hazard_ratios;  // exp(coefficient)
    double log_pl_fit = 0.0;
    double log_pl_null = 0.0;  // partial likelihood at b = 0
    double lr_stat = 0.0;      // 2 * (fit - null), df = #covariates
    int lr_df = 0;
    double lr_p = 1.0;
    int iterations = 0;  // accepted Newton updates
    bool converged = false;
    BaselineHazard baseline;
};

struct HazardRow {
    std::string label;
    double coef = 0.0;
    double se = 0.0;
    double hazard_ratio = 1.0;
    double wald_p = 1.0;  // chi_square_sf((coef/se)^2, 1)
};

struct PhCovariateTest {
    std::string label;  // covariate name, or "GLOBAL" for the joint test
    double chi_square = 0.0;
    int df = 1;
    double p_value = 1.0;
};

// Grambsch-Therneau proportional-hazards score test against a linear
// time interaction (per-covariate tests df = 1 plus a joint test with
// df = covariate count).
struct PhTestResult {
    std::vector<PhCovariateTest> per_covariate;
    PhCovariateTest global;
};

struct ScoreInfo {
    std::vector<double> score;
    SymmetricMatrix information;  // negative Hessian of the log PL
};

// Log partial likelihood at b under the given tie rule. Risk-set sums are
// computed with a per-risk-set max shift (log-sum-exp), so extreme linear
// predictors cannot overflow. Record order never affects the value: rows
// are reduced in a canonical sort order internally.
// Throws EstimationError if the value comes out non-finite.
double log_partial_likelihood(const DesignMatrix& m, const std::vector<double>& b, Ties ties);

// Analytic gradient and negative Hessian of log_partial_likelihood.
ScoreInfo score_and_information(const DesignMatrix& m, const std::vector<double>& b, Ties ties);

// Newton-Raphson from b = 0 with step-halving whenever a step fails to
// improve the log partial likelihood. Requires at least one event and a
// non-degenerate design. A singular information matrix throws
// IdentifiabilityError; hitting max_iter returns converged = false.
CoxFit fit_cox(const DesignMatrix& m, const FitOptions& options = {});

// Per-coefficient summary with hazard ratios and Wald p-values.
// Requires a converged fit.
std::vector<HazardRow> hazard_ratio_table(const CoxFit& fit);

// Breslow estimate of the baseline hazard increments at each event time.
// Requires a converged fit over the same design it was fitted on.
BaselineHazard breslow_baseline(const CoxFit& fit, const DesignMatrix& m);

// Score test of the proportional-hazards assumption: Schoenfeld residuals
// against event time (identity transform, centered). Requires a converged
// fit and at least two distinct event times.
PhTestResult ph_test(const CoxFit& fit, const DesignMatrix& m);

// Machine-readable report of a fit, full double precision. ph may be
// null when the diagnostic is unavailable (renders as JSON null).
nlohmann::json fit_report_json(const CoxFit& fit, const PhTestResult* ph);

}  // namespace patentsurv

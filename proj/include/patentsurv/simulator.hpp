#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"
#include "patentsurv/dataset.hpp"

namespace patentsurv {

// Latent continuous duration distribution at x = 0.
struct BaselineSpec {
    enum class Kind { Exponential, Weibull };
    Kind kind = Kind::Exponential;
    double rate = 0.08;  // exponential: H0(t) = rate * t
    double shape = 1.0;  // weibull: H0(t) = (t / scale)^shape
    double scale = 1.0;
};

// Sampling distribution for one covariate. Bernoulli serves the 0/1
// indicators, poisson (optionally shifted) the counts, categorical the
// technology field.
struct GeneratorSpec {
    enum class Kind { Bernoulli, Poisson, Categorical };
    Kind kind = Kind::Bernoulli;
    double p = 0.5;     // bernoulli
    double mean = 1.0;  // poisson
    int shift = 0;      // poisson: value = shift + draw
    std::map<std::string, double> probabilities;  // categorical, keyed by tech name
};

struct SimConfig {
    int n = 2025;
    std::uint64_t seed = 20250814;
    BaselineSpec baseline;
    int admin_censor_year = kStatutoryTermYears;
    int filing_year_min = 1995;
    int filing_year_max = 2005;
    // Proportional-hazards truth. Keys are covariate labels (base fields,
    // technology dummies, or interactions like "OW*DSIR").
    std::map<std::string, double> true_coefficients;
    // Keys: DSIR, OW, NC, NI, FS, TS, tech. A field without a generator
    // takes a constant fallback (counts 0, indicators 0, ts 1, tech other).
    std::map<std::string, GeneratorSpec> covariate_generators;
};

// Cohort mirroring the headline single-covariate setting: n = 2025,
// exponential baseline rate 0.08, DSIR bernoulli(0.5) with coefficient
// 0.330, plus realistic generators for every other field so the full
// model suite fits on the output.
SimConfig default_sim_config();

// Field-level validation; throws ConfigError naming the offending field.
void validate_config(const SimConfig& cfg);

// JSON mirror of SimConfig. Missing keys keep the default configuration's
// values; present keys replace the corresponding field wholesale.
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json sim_config_to_json(const SimConfig& cfg);

// Deterministic synthetic cohort. Per record: draw covariates, draw a
// latent continuous duration by inverse transform from
// S(t|x) = exp(-H0(t) exp(x.b)), round up to whole years, and censor
// administratively past admin_censor_year. Record i consumes a fixed
// 16-draw stride of the SplitMix64 stream keyed on the seed, so records
// are independent substreams and generation is reproducible bit for bit.
Dataset simulate(const SimConfig& cfg);

// Ground truth for oracle checks: the coefficients, baseline survival at
// integer years, and the expected censoring fraction computed as an exact
// expectation over the covariate distribution (poisson tails truncated at
// 1e-12 total mass).
nlohmann::json truth_report(const SimConfig& cfg);

}  // namespace patentsurv

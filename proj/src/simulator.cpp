#include "patentsurv/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <utility>
#include <vector>

#include "patentsurv/errors.hpp"

namespace patentsurv {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
constexpr int kDrawsPerRecord = 16;  // fixed per-record stride of the stream

// SplitMix64 (Steele, Lea & Flood). State advances by a fixed odd gamma
// per draw, so the substream for record i is just the stream started
// kDrawsPerRecord * i draws in — counter-based and collision-free.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        state += kGamma;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0,1)
};

SplitMix64 record_stream(std::uint64_t seed, std::uint64_t record_index) {
    return SplitMix64{seed + kGamma * (record_index * kDrawsPerRecord)};
}

int sample_bernoulli(SplitMix64& rng, double p) { return rng.next_unit() < p ? 1 : 0; }

// Single-uniform inversion keeps the per-record draw budget fixed
// regardless of the mean.
int sample_poisson(SplitMix64& rng, double mean, int shift) {
    double u = rng.next_unit();
    double pmf = std::exp(-mean);
    double cum = pmf;
    int k = 0;
    while (u >= cum && k < 100000) {
        ++k;
        pmf *= mean / k;
        cum += pmf;
    }
    return shift + k;
}

constexpr TechField kTechOrder[] = {TechField::Chemistry, TechField::Electrical,
                                    TechField::Mechanical, TechField::Instruments,
                                    TechField::OtherField};

TechField sample_tech(SplitMix64& rng, const GeneratorSpec& g) {
    double u = rng.next_unit();
    double cum = 0.0;
    for (TechField f : kTechOrder) {
        auto it = g.probabilities.find(std::string(tech_to_string(f)));
        if (it != g.probabilities.end()) cum += it->second;
        if (u < cum) return f;
    }
    return TechField::OtherField;  // guards rounding at u ~ 1
}

double cumulative_hazard(const BaselineSpec& b, double t) {
    return b.kind == BaselineSpec::Kind::Exponential ? b.rate * t
                                                     : std::pow(t / b.scale, b.shape);
}

double inverse_cumulative_hazard(const BaselineSpec& b, double y) {
    return b.kind == BaselineSpec::Kind::Exponential ? y / b.rate
                                                     : b.scale * std::pow(y, 1.0 / b.shape);
}

// Value of one coefficient label for a record; "A*B" is the product of
// its parts. Shared by generation and the truth report so both sides of
// every oracle agree on the linear predictor.
double model_value(const PatentRecord& rec, const std::string& label) {
    auto star = label.find('*');
    if (star != std::string::npos)
        return model_value(rec, label.substr(0, star)) *
               model_value(rec, label.substr(star + 1));
    auto canon = canonical_covariate_label(label);
    if (!canon) throw ConfigError("unknown coefficient label '" + label + "'");
    return *covariate_value(rec, *canon);
}

// Atoms a coefficient label depends on: its own base field, "tech" for
// technology dummies, both parents' atoms for interactions.
void collect_atoms(const std::string& label, std::vector<std::string>& out) {
    auto star = label.find('*');
    if (star != std::string::npos) {
        collect_atoms(label.substr(0, star), out);
        collect_atoms(label.substr(star + 1), out);
        return;
    }
    auto canon = canonical_covariate_label(label);
    if (!canon) throw ConfigError("unknown coefficient label '" + label + "'");
    static const std::vector<std::string> base = {"DSIR", "NC", "NI", "FS", "TS", "OW"};
    if (std::find(base.begin(), base.end(), *canon) != base.end())
        out.push_back(*canon);
    else
        out.push_back("tech");  // Electrical/Instrument/Chemistry/Mechanical/OtherField
}

const GeneratorSpec* find_generator(const SimConfig& cfg, const std::string& key) {
    auto it = cfg.covariate_generators.find(key);
    return it == cfg.covariate_generators.end() ? nullptr : &it->second;
}

std::string canonical_coefficient_label(const std::string& label) {
    auto star = label.find('*');
    if (star != std::string::npos)
        return canonical_coefficient_label(label.substr(0, star)) + "*" +
               canonical_coefficient_label(label.substr(star + 1));
    auto canon = canonical_covariate_label(label);
    if (!canon) throw ConfigError("unknown coefficient label '" + label + "'");
    return *canon;
}

}  // namespace

SimConfig default_sim_config() {
    SimConfig cfg;
    cfg.true_coefficients = {{"DSIR", 0.330}};
    GeneratorSpec dsir;
    dsir.kind = GeneratorSpec::Kind::Bernoulli;
    dsir.p = 0.5;
    GeneratorSpec ow;
    ow.kind = GeneratorSpec::Kind::Bernoulli;
    ow.p = 0.25;
    auto poisson = [](double mean, int shift) {
        GeneratorSpec g;
        g.kind = GeneratorSpec::Kind::Poisson;
        g.mean = mean;
        g.shift = shift;
        return g;
    };
    GeneratorSpec tech;
    tech.kind = GeneratorSpec::Kind::Categorical;
    tech.probabilities = {{"chemistry", 0.30},
                          {"electrical", 0.20},
                          {"mechanical", 0.20},
                          {"instruments", 0.15},
                          {"other", 0.15}};
    cfg.covariate_generators = {{"DSIR", dsir},         {"OW", ow},
                                {"NC", poisson(10, 0)}, {"NI", poisson(2, 1)},
                                {"FS", poisson(2, 0)},  {"TS", poisson(1, 1)},
                                {"tech", tech}};
    return cfg;
}

void validate_config(const SimConfig& cfg) {
    if (cfg.n < 1) throw ConfigError("n must be >= 1");
    if (cfg.admin_censor_year < 1 || cfg.admin_censor_year > kStatutoryTermYears)
        throw ConfigError("admin_censor_year must be in [1, " +
                          std::to_string(kStatutoryTermYears) + "]");
    if (cfg.filing_year_min > cfg.filing_year_max)
        throw ConfigError("filing_year_range must satisfy min <= max");
    if (cfg.baseline.kind == BaselineSpec::Kind::Exponential) {
        if (!(cfg.baseline.rate > 0.0)) throw ConfigError("baseline.rate must be > 0");
    } else {
        if (!(cfg.baseline.shape > 0.0)) throw ConfigError("baseline.shape must be > 0");
        if (!(cfg.baseline.scale > 0.0)) throw ConfigError("baseline.scale must be > 0");
    }

    for (const auto& [key, gen] : cfg.covariate_generators) {
        auto fail = [&key](const std::string& msg) {
            throw ConfigError("covariate_generators." + key + ": " + msg);
        };
        if (key == "DSIR" || key == "OW") {
            if (gen.kind != GeneratorSpec::Kind::Bernoulli)
                fail("indicator fields use a bernoulli generator");
            if (!(gen.p >= 0.0 && gen.p <= 1.0)) fail("p must be in [0,1]");
        } else if (key == "NC" || key == "NI" || key == "FS" || key == "TS") {
            if (gen.kind != GeneratorSpec::Kind::Poisson)
                fail("count fields use a poisson generator");
            if (!(gen.mean >= 0.0 && gen.mean <= 500.0)) fail("mean must be in [0, 500]");
            if (gen.shift < 0) fail("shift must be >= 0");
            if (key == "TS" && gen.shift < 1)
                fail("shift must be >= 1 so technology scope stays positive");
        } else if (key == "tech") {
            if (gen.kind != GeneratorSpec::Kind::Categorical)
                fail("tech uses a categorical generator");
            double total = 0.0;
            for (const auto& [name, p] : gen.probabilities) {
                if (!tech_from_string(name)) fail("unknown technology '" + name + "'");
                if (!(p >= 0.0)) fail("probability for '" + name + "' must be >= 0");
                total += p;
            }
            if (std::fabs(total - 1.0) > 1e-9) fail("probabilities must sum to 1");
        } else {
            fail("unknown field (expected DSIR, OW, NC, NI, FS, TS or tech)");
        }
    }

    for (const auto& [label, coef] : cfg.true_coefficients) {
        if (!std::isfinite(coef))
            throw ConfigError("true_coefficients." + label + ": value must be finite");
        std::vector<std::string> atoms;
        collect_atoms(label, atoms);  // also rejects unknown labels
        for (const std::string& atom : atoms)
            if (!find_generator(cfg, atom))
                throw ConfigError("true_coefficients." + label + ": no generator for '" +
                                  atom + "'");
    }
}

Dataset simulate(const SimConfig& cfg) {
    validate_config(cfg);
    Dataset d;
    d.provenance = "simulated(splitmix64,seed=" + std::to_string(cfg.seed) + ")";
    d.records.reserve(static_cast<std::size_t>(cfg.n));

    auto draw_indicator = [&](SplitMix64& rng, const char* key, int fallback) {
        const GeneratorSpec* g = find_generator(cfg, key);
        return g ? sample_bernoulli(rng, g->p) : fallback;
    };
    auto draw_count = [&](SplitMix64& rng, const char* key, int fallback) {
        const GeneratorSpec* g = find_generator(cfg, key);
        return g ? sample_poisson(rng, g->mean, g->shift) : fallback;
    };

    for (int i = 0; i < cfg.n; ++i) {
        SplitMix64 rng = record_stream(cfg.seed, static_cast<std::uint64_t>(i));
        PatentRecord rec;
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "SIM-%06d", i + 1);
        rec.id = idbuf;
        rec.firm_id = "F" + std::to_string(i % 266 + 1);

        rec.nc = draw_count(rng, "NC", 0);
        rec.ni = draw_count(rng, "NI", 0);
        rec.fs = draw_count(rng, "FS", 0);
        rec.ts = draw_count(rng, "TS", 1);
        rec.dsir = draw_indicator(rng, "DSIR", 0);
        rec.ow = draw_indicator(rng, "OW", 0);
        const GeneratorSpec* tech = find_generator(cfg, "tech");
        rec.tech = tech ? sample_tech(rng, *tech) : TechField::OtherField;

        int span = cfg.filing_year_max - cfg.filing_year_min + 1;
        int offset = static_cast<int>(rng.next_unit() * span);
        rec.filing_year = cfg.filing_year_min + std::min(offset, span - 1);

        double xb = 0.0;
        for (const auto& [label, coef] : cfg.true_coefficients)
            xb += coef * model_value(rec, label);
        double u = rng.next_unit();
        double latent = inverse_cumulative_hazard(cfg.baseline, -std::log1p(-u) * std::exp(-xb));
        if (!(latent <= static_cast<double>(cfg.admin_censor_year))) {
            rec.survival_years = cfg.admin_censor_year;
            rec.event = 0;
        } else {
            rec.survival_years = std::max(1, static_cast<int>(std::ceil(latent)));
            rec.event = 1;
        }
        d.records.push_back(std::move(rec));
    }
    return d;
}

namespace {

// Support of one atom as (pseudo-record field setter, probability) pairs.
struct AtomSupport {
    std::string atom;
    std::vector<std::pair<double, double>> values;  // numeric value or tech index, prob
};

AtomSupport atom_support(const SimConfig& cfg, const std::string& atom) {
    const GeneratorSpec& g = *find_generator(cfg, atom);
    AtomSupport s;
    s.atom = atom;
    if (atom == "tech") {
        for (std::size_t t = 0; t < std::size(kTechOrder); ++t) {
            auto it = g.probabilities.find(std::string(tech_to_string(kTechOrder[t])));
            double p = it == g.probabilities.end() ? 0.0 : it->second;
            if (p > 0.0) s.values.emplace_back(static_cast<double>(t), p);
        }
        return s;
    }
    if (g.kind == GeneratorSpec::Kind::Bernoulli) {
        s.values = {{0.0, 1.0 - g.p}, {1.0, g.p}};
        return s;
    }
    // Poisson, truncated once 1 - 1e-12 of the mass is covered, then
    // renormalized so the expectation stays a proper mean.
    double pmf = std::exp(-g.mean);
    double cum = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        if (k > 0) pmf *= g.mean / k;
        s.values.emplace_back(static_cast<double>(g.shift + k), pmf);
        cum += pmf;
        if (cum >= 1.0 - 1e-12) break;
    }
    for (auto& [v, p] : s.values) p /= cum;
    return s;
}

void apply_atom(PatentRecord& rec, const std::string& atom, double value) {
    if (atom == "tech")
        rec.tech = kTechOrder[static_cast<std::size_t>(value)];
    else if (atom == "DSIR")
        rec.dsir = static_cast<int>(value);
    else if (atom == "OW")
        rec.ow = static_cast<int>(value);
    else if (atom == "NC")
        rec.nc = static_cast<int>(value);
    else if (atom == "NI")
        rec.ni = static_cast<int>(value);
    else if (atom == "FS")
        rec.fs = static_cast<int>(value);
    else
        rec.ts = static_cast<int>(value);
}

// Distribution of this component's contribution to x.b: enumerate the
// product of its atoms' supports through a pseudo-record, evaluating
// labels with the same model_value used by simulate().
void enumerate_component(const SimConfig& cfg, const std::vector<AtomSupport>& atoms,
                         const std::vector<std::string>& labels, std::size_t depth,
                         PatentRecord& rec, double prob,
                         std::vector<std::pair<double, double>>& out) {
    if (depth == atoms.size()) {
        double v = 0.0;
        for (const std::string& label : labels)
            v += cfg.true_coefficients.at(label) * model_value(rec, label);
        out.emplace_back(v, prob);
        return;
    }
    for (const auto& [value, p] : atoms[depth].values) {
        apply_atom(rec, atoms[depth].atom, value);
        enumerate_component(cfg, atoms, labels, depth + 1, rec, prob * p, out);
    }
}

double expect_over_components(const std::vector<std::vector<std::pair<double, double>>>& comps,
                              std::size_t depth, double partial, double h_admin) {
    if (depth == comps.size()) return std::exp(-h_admin * std::exp(partial));
    double s = 0.0;
    for (const auto& [v, p] : comps[depth]) s += p * expect_over_components(comps, depth + 1, partial + v, h_admin);
    return s;
}

double expected_censoring_fraction(const SimConfig& cfg) {
    // Group coefficient labels into blocks that share base fields; blocks
    // are independent, so the expectation nests one sum per block.
    std::vector<std::vector<std::string>> atom_groups;  // shared-atom components
    std::vector<std::vector<std::string>> label_groups;
    for (const auto& [label, coef] : cfg.true_coefficients) {
        std::vector<std::string> atoms;
        collect_atoms(label, atoms);
        std::sort(atoms.begin(), atoms.end());
        atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
        std::vector<std::size_t> hits;
        for (std::size_t g = 0; g < atom_groups.size(); ++g)
            for (const std::string& a : atoms)
                if (std::find(atom_groups[g].begin(), atom_groups[g].end(), a) !=
                    atom_groups[g].end()) {
                    hits.push_back(g);
                    break;
                }
        // Merge every group this label touches, then add the label.
        std::vector<std::string> merged_atoms = atoms;
        std::vector<std::string> merged_labels = {label};
        for (std::size_t h = hits.size(); h-- > 0;) {
            for (auto& a : atom_groups[hits[h]])
                if (std::find(merged_atoms.begin(), merged_atoms.end(), a) == merged_atoms.end())
                    merged_atoms.push_back(a);
            for (auto& l : label_groups[hits[h]]) merged_labels.push_back(l);
            atom_groups.erase(atom_groups.begin() + static_cast<std::ptrdiff_t>(hits[h]));
            label_groups.erase(label_groups.begin() + static_cast<std::ptrdiff_t>(hits[h]));
        }
        std::sort(merged_atoms.begin(), merged_atoms.end());
        std::sort(merged_labels.begin(), merged_labels.end());
        atom_groups.push_back(std::move(merged_atoms));
        label_groups.push_back(std::move(merged_labels));
    }

    std::vector<std::vector<std::pair<double, double>>> comps;
    for (std::size_t g = 0; g < atom_groups.size(); ++g) {
        std::vector<AtomSupport> atoms;
        for (const std::string& a : atom_groups[g]) atoms.push_back(atom_support(cfg, a));
        std::vector<std::pair<double, double>> dist;
        PatentRecord rec;
        enumerate_component(cfg, atoms, label_groups[g], 0, rec, 1.0, dist);
        comps.push_back(std::move(dist));
    }
    double h_admin = cumulative_hazard(cfg.baseline, static_cast<double>(cfg.admin_censor_year));
    return expect_over_components(comps, 0, 0.0, h_admin);
}

nlohmann::json baseline_to_json(const BaselineSpec& b) {
    if (b.kind == BaselineSpec::Kind::Exponential)
        return {{"type", "exponential"}, {"rate", b.rate}};
    return {{"type", "weibull"}, {"shape", b.shape}, {"scale", b.scale}};
}

BaselineSpec baseline_from_json(const nlohmann::json& j) {
    BaselineSpec b;
    std::string type = j.at("type").get<std::string>();
    if (type == "exponential") {
        b.kind = BaselineSpec::Kind::Exponential;
        b.rate = j.at("rate").get<double>();
    } else if (type == "weibull") {
        b.kind = BaselineSpec::Kind::Weibull;
        b.shape = j.at("shape").get<double>();
        b.scale = j.at("scale").get<double>();
    } else {
        throw ConfigError("baseline.type must be exponential or weibull, got '" + type + "'");
    }
    return b;
}

GeneratorSpec generator_from_json(const std::string& key, const nlohmann::json& j) {
    GeneratorSpec g;
    std::string type = j.at("type").get<std::string>();
    if (type == "bernoulli") {
        g.kind = GeneratorSpec::Kind::Bernoulli;
        g.p = j.at("p").get<double>();
    } else if (type == "poisson") {
        g.kind = GeneratorSpec::Kind::Poisson;
        g.mean = j.at("mean").get<double>();
        g.shift = j.value("shift", 0);
    } else if (type == "categorical") {
        g.kind = GeneratorSpec::Kind::Categorical;
        for (const auto& [name, p] : j.at("probabilities").items())
            g.probabilities[name] = p.get<double>();
    } else {
        throw ConfigError("covariate_generators." + key + ".type must be bernoulli, poisson or categorical");
    }
    return g;
}

nlohmann::json generator_to_json(const GeneratorSpec& g) {
    switch (g.kind) {
        case GeneratorSpec::Kind::Bernoulli:
            return {{"type", "bernoulli"}, {"p", g.p}};
        case GeneratorSpec::Kind::Poisson:
            return {{"type", "poisson"}, {"mean", g.mean}, {"shift", g.shift}};
        default:
            return {{"type", "categorical"}, {"probabilities", g.probabilities}};
    }
}

}  // namespace

SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig cfg = default_sim_config();
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n") {
                cfg.n = value.get<int>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "baseline") {
                cfg.baseline = baseline_from_json(value);
            } else if (key == "admin_censor_year") {
                cfg.admin_censor_year = value.get<int>();
            } else if (key == "filing_year_range") {
                if (!value.is_array() || value.size() != 2)
                    throw ConfigError("filing_year_range must be a [min, max] pair");
                cfg.filing_year_min = value[0].get<int>();
                cfg.filing_year_max = value[1].get<int>();
            } else if (key == "true_coefficients") {
                cfg.true_coefficients.clear();
                for (const auto& [label, coef] : value.items())
                    cfg.true_coefficients[canonical_coefficient_label(label)] =
                        coef.get<double>();
            } else if (key == "covariate_generators") {
                cfg.covariate_generators.clear();
                for (const auto& [field, gen] : value.items()) {
                    std::string canon;
                    if (auto c = canonical_covariate_label(field); c && *c != "tech")
                        canon = *c;
                    std::string lowered = field;
                    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
                    if (lowered == "tech") canon = "tech";
                    if (canon.empty())
                        throw ConfigError("covariate_generators." + field +
                                          ": unknown field (expected DSIR, OW, NC, NI, FS, TS or tech)");
                    cfg.covariate_generators[canon] = generator_from_json(canon, gen);
                }
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

nlohmann::json sim_config_to_json(const SimConfig& cfg) {
    nlohmann::json gens;
    for (const auto& [key, g] : cfg.covariate_generators) gens[key] = generator_to_json(g);
    return {{"n", cfg.n},
            {"seed", cfg.seed},
            {"baseline", baseline_to_json(cfg.baseline)},
            {"admin_censor_year", cfg.admin_censor_year},
            {"filing_year_range", {cfg.filing_year_min, cfg.filing_year_max}},
            {"true_coefficients", cfg.true_coefficients},
            {"covariate_generators", gens}};
}

nlohmann::json truth_report(const SimConfig& cfg) {
    validate_config(cfg);
    std::vector<int> years;
    std::vector<double> survival;
    for (int y = 1; y <= cfg.admin_censor_year; ++y) {
        years.push_back(y);
        survival.push_back(std::exp(-cumulative_hazard(cfg.baseline, static_cast<double>(y))));
    }
    return {{"n", cfg.n},
            {"seed", cfg.seed},
            {"admin_censor_year", cfg.admin_censor_year},
            {"baseline", baseline_to_json(cfg.baseline)},
            {"true_coefficients", cfg.true_coefficients},
            {"baseline_survival", {{"year", years}, {"survival", survival}}},
            {"expected_censoring_fraction", expected_censoring_fraction(cfg)}};
}

}  // namespace patentsurv

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "patentsurv/errors.hpp"
#include "patentsurv/kaplan_meier.hpp"
#include "patentsurv/log_rank.hpp"
#include "patentsurv/numerics.hpp"
#include "patentsurv/simulator.hpp"

using namespace patentsurv;
using testutil::record;

namespace {

Dataset four_record_example() {
    // Durations/events (1,1),(2,1),(2,0),(3,1): the classic hand case.
    Dataset d;
    d.records.push_back(record("A", 1, 1));
    d.records.push_back(record("B", 2, 1));
    d.records.push_back(record("C", 2, 0));
    d.records.push_back(record("D", 3, 1));
    return d;
}

// Step-function value of the curve at integer year t (1.0 before the
// first retained event time).
double step_at(const SurvivalCurve& c, int t) {
    double s = 1.0;
    for (std::size_t j = 0; j < c.size() && c.times[j] <= t; ++j) s = c.estimate[j];
    return s;
}

Dataset random_cohort(unsigned seed, int n) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> years(1, 20);
    std::bernoulli_distribution ev(0.7), half(0.5);
    std::uniform_int_distribution<int> techs(0, 4);
    Dataset d;
    for (int i = 0; i < n; ++i) {
        PatentRecord r = record("R" + std::to_string(i), years(rng), ev(rng) ? 1 : 0);
        r.dsir = half(rng) ? 1 : 0;
        r.ow = half(rng) ? 1 : 0;
        r.tech = static_cast<TechField>(techs(rng));
        d.records.push_back(r);
    }
    return d;
}

}  // namespace

TEST_CASE("product-limit estimate on the four-record hand case") {
    auto curves = fit_km(four_record_example());
    REQUIRE(curves.size() == 1);
    const SurvivalCurve& c = curves[0];
    CHECK(c.group_label == "all");
    CHECK(c.times == std::vector<int>{1, 2, 3});
    CHECK(c.n_risk == std::vector<int>{4, 3, 1});
    CHECK(c.n_events == std::vector<int>{1, 1, 1});
    CHECK(std::abs(c.estimate[0] - 0.75) < 1e-12);
    CHECK(std::abs(c.estimate[1] - 0.5) < 1e-12);
    CHECK(std::abs(c.estimate[2] - 0.0) < 1e-12);

    // Greenwood: se(1) = 0.75 * sqrt(1/12); se(2) = 0.5 * sqrt(1/12 + 1/6).
    CHECK(std::abs(c.greenwood_se[0] - 0.21650635094610965) < 1e-9);
    CHECK(std::abs(c.greenwood_se[1] - 0.25) < 1e-12);
    // The curve reaches zero at t=3, where the band is undefined.
    CHECK(std::isnan(c.greenwood_se[2]));
    CHECK(std::isnan(c.ci_low[2]));
    CHECK(std::isnan(c.ci_high[2]));

    CHECK(c.median_survival() == 2);
}

TEST_CASE("all-censored data retains no event times") {
    Dataset d;
    for (int i = 0; i < 5; ++i) d.records.push_back(record("C" + std::to_string(i), 20, 0));
    auto curves = fit_km(d);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].size() == 0);
    CHECK_FALSE(curves[0].median_survival().has_value());
}

TEST_CASE("censoring tied with an event stays in the risk set") {
    Dataset d;
    d.records.push_back(record("A", 2, 1));
    d.records.push_back(record("B", 2, 0));
    d.records.push_back(record("C", 3, 1));
    auto curves = fit_km(d);
    const SurvivalCurve& c = curves[0];
    CHECK(c.times == std::vector<int>{2, 3});
    CHECK(c.n_risk == std::vector<int>{3, 1});  // the censored record counts at t=2
    CHECK(c.estimate[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(c.estimate[1] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("grouped fits cover the whole covariate domain") {
    Dataset d = random_cohort(11, 120);

    SUBCASE("dsir yields 0 and 1 in order") {
        auto curves = fit_km(d, "dsir");
        REQUIRE(curves.size() == 2);
        CHECK(curves[0].group_label == "dsir=0");
        CHECK(curves[1].group_label == "dsir=1");
    }

    SUBCASE("tech yields all five categories") {
        auto curves = fit_km(d, "tech");
        REQUIRE(curves.size() == 5);
        CHECK(curves[0].group_label == "tech=chemistry");
        CHECK(curves[4].group_label == "tech=other");
    }

    SUBCASE("an empty group is an error naming the group") {
        Dataset one_sided;
        one_sided.records.push_back(record("A", 3, 1));  // dsir defaults to 0
        CHECK_THROWS_WITH_AS(fit_km(one_sided, "dsir"), doctest::Contains("dsir=1"),
                             EstimationError);
    }

    SUBCASE("unknown grouping label") {
        CHECK_THROWS_AS(fit_km(d, "firm_id"), ConfigError);
    }

    SUBCASE("invalid dataset is rejected") {
        Dataset bad = d;
        bad.records[0].event = 7;
        CHECK_THROWS_WITH_AS(fit_km(bad), doctest::Contains("row 1"), EstimationError);
        CHECK_THROWS_AS(fit_km(Dataset{}), EstimationError);
    }
}

TEST_CASE("product-limit telescoping holds exactly") {
    auto curves = fit_km(random_cohort(17, 300));
    const SurvivalCurve& c = curves[0];
    REQUIRE(c.size() > 5);
    double running = 1.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        running *= 1.0 - static_cast<double>(c.n_events[j]) / c.n_risk[j];
        CHECK(c.estimate[j] == running);  // bitwise: same product, same order
        if (j > 0) CHECK(c.n_risk[j] < c.n_risk[j - 1]);
        CHECK(c.n_events[j] >= 1);
    }
}

TEST_CASE("record order never affects the curves") {
    Dataset d = random_cohort(23, 200);
    auto base = fit_km(d, "tech");
    std::mt19937 rng(99);
    for (int trial = 0; trial < 3; ++trial) {
        std::shuffle(d.records.begin(), d.records.end(), rng);
        auto shuffled = fit_km(d, "tech");
        REQUIRE(shuffled.size() == base.size());
        for (std::size_t g = 0; g < base.size(); ++g) {
            CHECK(shuffled[g].times == base[g].times);
            CHECK(shuffled[g].estimate == base[g].estimate);
            // bits_equal: bands are NaN where a group's curve hits zero
            CHECK(testutil::bits_equal(shuffled[g].ci_low, base[g].ci_low));
            CHECK(testutil::bits_equal(shuffled[g].ci_high, base[g].ci_high));
        }
    }
}

TEST_CASE("moving a censoring time within an event gap changes nothing") {
    // Risk-set membership only changes when a censoring time crosses an
    // event time, so sliding it inside a gap (or beyond the last event)
    // must leave every estimate identical.
    Dataset d;
    d.records.push_back(record("A", 3, 1));
    d.records.push_back(record("B", 7, 1));
    d.records.push_back(record("C", 4, 0));   // in the (3,7) gap
    d.records.push_back(record("D", 8, 0));   // after the last event
    d.records.push_back(record("E", 10, 1));
    d.records.push_back(record("F", 12, 0));  // after the last event
    auto base = fit_km(d);

    for (int shifted : {5, 6}) {
        Dataset moved = d;
        moved.records[2].survival_years = shifted;
        auto curves = fit_km(moved);
        CHECK(curves[0].estimate == base[0].estimate);
        CHECK(curves[0].n_risk == base[0].n_risk);
    }
    Dataset moved = d;
    moved.records[5].survival_years = 20;  // still beyond the last event
    auto curves = fit_km(moved);
    CHECK(curves[0].estimate == base[0].estimate);
    CHECK(curves[0].greenwood_se == base[0].greenwood_se);
}

TEST_CASE("confidence bands stay in [0,1] and tighten with lower level") {
    auto curves = fit_km(random_cohort(31, 250));
    const SurvivalCurve& c95 = curves[0];
    SurvivalCurve c80 = greenwood_band(c95, 0.80);
    CHECK(c80.band_level == 0.80);
    for (std::size_t j = 0; j < c95.size(); ++j) {
        if (std::isnan(c95.greenwood_se[j])) continue;
        CHECK(c95.ci_low[j] >= 0.0);
        CHECK(c95.ci_high[j] <= 1.0);
        CHECK(c95.ci_low[j] <= c95.estimate[j]);
        CHECK(c95.estimate[j] <= c95.ci_high[j]);
        CHECK(c80.ci_low[j] >= c95.ci_low[j]);
        CHECK(c80.ci_high[j] <= c95.ci_high[j]);
        CHECK(c80.greenwood_se[j] == c95.greenwood_se[j]);  // level moves the band only
    }
    CHECK_THROWS_AS(greenwood_band(c95, 0.0), DomainError);
    CHECK_THROWS_AS(greenwood_band(c95, 1.0), DomainError);
    CHECK_THROWS_AS(greenwood_band(c95, -2.0), DomainError);
}

TEST_CASE("curve CSV export") {
    auto curves = fit_km(four_record_example());
    std::ostringstream out;
    write_curves_csv(curves, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "group,time,n_risk,n_events,survival,se,ci_low,ci_high");
    std::getline(in, line);
    CHECK(line.substr(0, 10) == "all,1,4,1,");
    // The last row hits S=0, where the band is undefined: empty cells.
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line == "all,3,1,1,0,,,");
}

TEST_CASE("higher hazard pushes the whole curve down") {
    SimConfig cfg = default_sim_config();
    cfg.n = 5000;
    cfg.seed = 91;
    Dataset d = simulate(cfg);
    auto curves = fit_km(d, "dsir");
    REQUIRE(curves.size() == 2);
    for (int year = 1; year <= 20; ++year)
        CHECK(step_at(curves[1], year) <= step_at(curves[0], year) + 1e-12);
}

TEST_CASE("log-rank hand case: one event per group") {
    Dataset d;
    d.records.push_back(record("A", 1, 1));
    d.records.push_back(record("B", 2, 1));
    d.records.back().dsir = 1;
    LogRankResult res = log_rank_test(d, "dsir");
    CHECK(res.df == 1);
    CHECK(std::abs(res.chi_square - 1.0) < 1e-9);
    CHECK(std::abs(res.p_value - 0.3173) < 1e-3);
    CHECK(res.p_value == chi_square_sf(res.chi_square, res.df));
    REQUIRE(res.per_group.size() == 2);
    CHECK(res.per_group[0].observed == 1.0);
    CHECK(res.per_group[0].expected == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(res.per_group[1].expected == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("duplicated groups give a chi-square of exactly zero") {
    Dataset d = random_cohort(41, 60);
    Dataset doubled;
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        PatentRecord a = d.records[i];
        a.id = "L" + std::to_string(i);
        a.ow = 0;
        PatentRecord b = a;
        b.id = "R" + std::to_string(i);
        b.ow = 1;
        doubled.records.push_back(a);
        doubled.records.push_back(b);
    }
    LogRankResult res = log_rank_test(doubled, "ow");
    CHECK(res.chi_square == 0.0);
    CHECK(res.p_value == 1.0);

    SUBCASE("even when everyone exits at one tied time") {
        Dataset tiny;
        tiny.records.push_back(record("A", 4, 1));
        tiny.records.push_back(record("B", 4, 1));
        tiny.records.back().dsir = 1;
        LogRankResult degenerate = log_rank_test(tiny, "dsir");
        CHECK(degenerate.chi_square == 0.0);
        CHECK(degenerate.p_value == 1.0);
    }
}

TEST_CASE("log-rank totals and symmetry") {
    Dataset d = random_cohort(47, 180);
    LogRankResult res = log_rank_test(d, "dsir");
    double o = 0.0, e = 0.0;
    for (const LogRankGroup& g : res.per_group) {
        o += g.observed;
        e += g.expected;
    }
    CHECK(o == doctest::Approx(e).epsilon(1e-12));

    Dataset flipped = d;
    for (PatentRecord& r : flipped.records) r.dsir = 1 - r.dsir;
    LogRankResult mirrored = log_rank_test(flipped, "dsir");
    CHECK(mirrored.chi_square == doctest::Approx(res.chi_square).epsilon(1e-12));
    CHECK(mirrored.per_group[0].observed == res.per_group[1].observed);

    std::mt19937 rng(5);
    std::shuffle(d.records.begin(), d.records.end(), rng);
    LogRankResult shuffled = log_rank_test(d, "dsir");
    CHECK(shuffled.chi_square == res.chi_square);
}

TEST_CASE("five-group comparison has four degrees of freedom") {
    Dataset d = random_cohort(53, 400);
    LogRankResult res = log_rank_test(d, "tech");
    CHECK(res.df == 4);
    CHECK(res.chi_square >= 0.0);
    CHECK(res.p_value >= 0.0);
    CHECK(res.p_value <= 1.0);
    CHECK(res.per_group.size() == 5);
}

TEST_CASE("log-rank error cases") {
    Dataset d = random_cohort(59, 40);

    SUBCASE("grouping is mandatory") { CHECK_THROWS_AS(log_rank_test(d, ""), ConfigError); }

    SUBCASE("no events") {
        Dataset censored;
        censored.records.push_back(record("A", 5, 0));
        censored.records.push_back(record("B", 6, 0));
        censored.records.back().dsir = 1;
        CHECK_THROWS_WITH_AS(log_rank_test(censored, "dsir"), doctest::Contains("no events"),
                             EstimationError);
    }

    SUBCASE("group missing from the data") {
        Dataset one_sided;
        one_sided.records.push_back(record("A", 5, 1));
        one_sided.records.push_back(record("B", 6, 1));
        CHECK_THROWS_WITH_AS(log_rank_test(one_sided, "ow"), doctest::Contains("ow=1"),
                             EstimationError);
    }

    SUBCASE("a group that never shares risk time makes the variance singular") {
        Dataset sparse;
        sparse.records.push_back(record("A1", 5, 1, 0, 1, 1, 1, 0, 0, TechField::Chemistry));
        sparse.records.push_back(record("A2", 5, 1, 0, 1, 1, 1, 0, 0, TechField::Chemistry));
        sparse.records.push_back(record("B1", 5, 1, 0, 1, 1, 1, 0, 0, TechField::Electrical));
        sparse.records.push_back(record("B2", 6, 1, 0, 1, 1, 1, 0, 0, TechField::Electrical));
        // Both mechanical records leave before the first event time.
        sparse.records.push_back(record("C1", 2, 0, 0, 1, 1, 1, 0, 0, TechField::Mechanical));
        sparse.records.push_back(record("C2", 2, 0, 0, 1, 1, 1, 0, 0, TechField::Mechanical));
        sparse.records.push_back(record("D1", 5, 1, 0, 1, 1, 1, 0, 0, TechField::Instruments));
        sparse.records.push_back(record("D2", 7, 1, 0, 1, 1, 1, 0, 0, TechField::Instruments));
        sparse.records.push_back(record("E1", 5, 1, 0, 1, 1, 1, 0, 0, TechField::OtherField));
        sparse.records.push_back(record("E2", 8, 0, 0, 1, 1, 1, 0, 0, TechField::OtherField));
        CHECK_THROWS_WITH_AS(log_rank_test(sparse, "tech"), doctest::Contains("singular"),
                             EstimationError);
    }
}

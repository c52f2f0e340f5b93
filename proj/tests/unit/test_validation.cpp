#include "elvol/validation.hpp"

#include <doctest.h>

using namespace elvol;

TEST_CASE("every criterion has its thresholds") {
    const auto tol = default_tolerances();
    for (const char* key : {"c1.tolerance", "c2.rel_frobenius", "c3.cross", "c4.rel_error", "c5.min_slope",
                            "c6.identity", "c7.ps_tolerance", "c8.min_power", "c9.wald_p", "c10.reconstruction"}) {
        CHECK_MESSAGE(tol.contains(key), key);
    }
}

TEST_CASE("a corrupted tolerance fails only its own criterion") {
    ValidationOptions opt;
    opt.only = {1, 10};
    const auto clean = run_validation(opt);
    REQUIRE(clean.criteria.size() == 2);
    CHECK(clean.all_passed());
    opt.overrides["c10.reconstruction"] = -1.0;
    const auto broken = run_validation(opt);
    CHECK(broken.criteria[0].passed);
    CHECK_FALSE(broken.criteria[1].passed);
    CHECK_FALSE(broken.all_passed());
}

TEST_CASE("unknown tolerance keys are rejected") {
    ValidationOptions opt;
    opt.overrides["c99.bogus"] = 1.0;
    CHECK_THROWS_AS(run_validation(opt), Error);
}

TEST_CASE("report schema round-trips") {
    ValidationReport r;
    CriterionResult c;
    c.id = 3;
    c.name = "x";
    c.passed = true;
    c.measured = {{"a", 0.125}, {"b", -1e-300}};
    c.thresholds = {{"t", 0.03}};
    c.seconds = 1.5;
    c.detail = "quoted \"text\"";
    r.criteria.push_back(c);
    const auto back = parse_report_json(report_json(r));
    REQUIRE(back.criteria.size() == 1);
    CHECK(back.criteria[0].measured == c.measured);
    CHECK(back.criteria[0].thresholds == c.thresholds);
    CHECK(back.criteria[0].detail == c.detail);
    CHECK(back.criteria[0].passed);
    CHECK(report_json(back) == report_json(r));
    CHECK(report_text(r).rfind("[PASS]", 0) == 0);
    CHECK_THROWS_AS(parse_report_json("{}"), Error);
}

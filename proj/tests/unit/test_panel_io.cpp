#include "elvol/panel_io.hpp"
#include "elvol/pipeline.hpp"
#include "elvol/series_io.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace elvol;

namespace {

PricePanel small_panel() {
    Matrix v(3, 2);
    v << 1.0 / 3.0, -2.5, 1e-300, 4.0, 0.1, 123456.789;
    std::vector<Date> dates{parse_date("2024-03-30"), parse_date("2024-03-31"), parse_date("2024-04-01")};
    std::vector<DstLogEntry> log{{dates[1], DstAction::ImputedMissing, 1, "mean of 1 and 2"}};
    return PricePanel(dates, v, DeliveryPartition::from_breakpoints({0.0, 1.0, kTwoPi}, {"night", "day"}), "DE",
                      log);
}

} // namespace

TEST_CASE("numbers round-trip exactly") {
    for (double x : {1.0 / 3.0, -1e-300, 6.02214076e23, 0.1}) {
        CHECK(std::stod(format_number(x)) == x);
    }
}

TEST_CASE("panel csv and sidecar round-trip") {
    const auto panel = small_panel();
    std::ostringstream csv;
    write_panel_csv(csv, panel);
    std::istringstream csv_in(csv.str());
    std::istringstream json_in(panel_sidecar_json(panel));
    const auto back = read_panel(csv_in, json_in);
    CHECK(back.values() == panel.values());
    CHECK(back.dates() == panel.dates());
    CHECK(back.partition() == panel.partition());
    CHECK(back.partition().labels() == std::vector<std::string>{"night", "day"});
    CHECK(back.zone() == "DE");
    REQUIRE(back.dst_log().size() == 1);
    CHECK(back.dst_log()[0].bin == 1);
}

TEST_CASE("panel reader rejects a column count that disagrees with the partition") {
    const auto panel = small_panel();
    std::istringstream csv_in("date,a,b,c\n2024-01-01,1,2,3\n");
    std::istringstream json_in(panel_sidecar_json(panel));
    CHECK_THROWS_AS(read_panel(csv_in, json_in), Error);
}

TEST_CASE("dated matrices keep NaN cells") {
    Matrix m(2, 2);
    m << std::nan(""), 1.0, 2.0, 3.0;
    std::ostringstream out;
    write_dated_matrix_csv(out, {parse_date("2024-01-01"), parse_date("2024-01-02")}, m, {"a", "b"});
    std::istringstream in(out.str());
    const auto back = read_dated_matrix_csv(in);
    CHECK(std::isnan(back.values(0, 0)));
    CHECK(back.values(1, 1) == 3.0);
    CHECK(back.labels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("rcv series round-trip through the long layout") {
    RcvSeries s;
    s.window = 5;
    s.delta = 1.0 / 365.0;
    s.adjusted = true;
    s.rolling = false;
    for (int k = 0; k < 3; ++k) {
        Matrix m(2, 2);
        m << 1.0 + k, 0.25, 0.25, 2.0 / (k + 1);
        s.mats.push_back(m);
        s.dates.push_back(add_days(parse_date("2024-01-07"), 5 * k));
    }
    std::ostringstream csv;
    write_rcv_long_csv(csv, s);
    std::istringstream csv_in(csv.str());
    std::istringstream json_in(rcv_manifest_json(s));
    const auto back = read_rcv(csv_in, json_in);
    REQUIRE(back.size() == 3);
    CHECK(back.window == 5);
    CHECK(back.adjusted);
    CHECK_FALSE(back.rolling);
    CHECK(back.dates == s.dates);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(back.mats[k] == s.mats[k]);
    }
}

TEST_CASE("matrix csv round-trip") {
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, 6.5;
    std::ostringstream out;
    write_matrix_csv(out, m, {"r1", "r2"}, {"a", "b", "c"});
    std::istringstream in(out.str());
    CHECK(read_matrix_csv(in) == m);
}

TEST_CASE("configuration parsing") {
    const std::string kMinimal = R"({"simulation": {}})";
    SUBCASE("defaults follow weekly windows on a daily grid") {
        const auto c = parse_pipeline_config(kMinimal);
        CHECK(c.rcv.window == 7);
        CHECK(c.rcv.delta == doctest::Approx(1.0 / 365.0));
        CHECK(c.rcv.rolling);
        CHECK(c.refit_days == 28);
        CHECK(c.burn_in_days == 364);
        CHECK(c.detrend.bandwidth_days == 90.0);
        CHECK(c.nic_specs == std::vector<int>{1, 2, 3, 4});
        CHECK(c.nic_hac_lags == 14);
    }
    SUBCASE("a configuration without data is rejected") {
        CHECK_THROWS_AS(parse_pipeline_config("{}"), Error);
        CHECK_THROWS_AS(parse_pipeline_config("{"), Error);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_pipeline_config(R"({"simulation": {}, "rcv": {"windw": 7}})"), Error);
        CHECK_THROWS_AS(parse_pipeline_config(R"({"simulation": {}, "colour": 1})"), Error);
    }
    SUBCASE("invalid values are rejected") {
        CHECK_THROWS_AS(parse_pipeline_config(R"({"simulation": {}, "rcv": {"window": 0}})"), Error);
        CHECK_THROWS_AS(parse_pipeline_config(R"({"simulation": {}, "stats": {"nic_specs": [5]}})"), Error);
    }
    SUBCASE("canonical form is a fixed point and the hash ignores the output directory") {
        auto c = parse_pipeline_config(R"({"simulation": {}, "rcv": {"window": 14}, "output_dir": "a"})");
        const auto canonical = pipeline_config_json(c);
        CHECK(pipeline_config_json(parse_pipeline_config(canonical)) == canonical);
        auto moved = c;
        moved.output_dir = "b";
        CHECK(config_hash(moved) == config_hash(c));
        CHECK(config_hash(c).size() == 16);
        CHECK(config_hash(c) != config_hash(parse_pipeline_config(kMinimal)));
    }
}

#include "elvol/calendar.hpp"
#include "elvol/panel.hpp"
#include "elvol/partition.hpp"

#include <doctest.h>

#include <fmt/format.h>
#include <sstream>

using namespace elvol;
using namespace std::chrono_literals;

TEST_CASE("dates parse, format and count weekdays") {
    const Date d = parse_date("2024-01-01");
    CHECK(format_date(d) == "2024-01-01");
    CHECK(weekday_index(d) == 0);
    CHECK(weekday_index(parse_date("2024-01-07")) == 6);
    CHECK(format_date(add_days(d, 60)) == "2024-03-01");
    CHECK(days_between(d, parse_date("2025-01-01")) == 366);
    CHECK_THROWS_AS(parse_date("2024-13-01"), Error);
}

TEST_CASE("EU summer time gives 23 and 25 hour days") {
    const auto berlin = TimeZone::named("Europe/Berlin");
    CHECK(berlin.day_length(parse_date("2024-03-31")) == 23h);
    CHECK(berlin.day_length(parse_date("2024-10-27")) == 25h);
    CHECK(berlin.day_length(parse_date("2024-06-01")) == 24h);
    CHECK(TimeZone::named("UTC").day_length(parse_date("2024-03-31")) == 24h);
    const auto spring = berlin.transition_on(parse_date("2024-03-31"));
    REQUIRE(spring);
    CHECK(spring->kind == DstTransition::Kind::Spring);
    CHECK(spring->local_start == 2h);
    CHECK_THROWS_AS(TimeZone::named("Mars/Olympus"), Error);
}

TEST_CASE("timestamps with and without offsets") {
    const auto utc = TimeZone::named("UTC");
    const auto a = parse_timestamp("2024-05-01T10:00:00+02:00", utc);
    const auto b = parse_timestamp("2024-05-01 08:00", utc);
    CHECK(a == b);
    const auto berlin = TimeZone::named("Europe/Berlin");
    CHECK(parse_timestamp("2024-05-01 10:00", berlin) == a);
}

TEST_CASE("partitions validate breakpoints and weights") {
    const auto p = DeliveryPartition::uniform(24);
    CHECK(p.size() == 24);
    CHECK(p.labels().front() == "h01");
    CHECK(p.average_weights().sum() == doctest::Approx(1.0));
    CHECK(p.refines(DeliveryPartition::uniform(4)));
    CHECK_FALSE(DeliveryPartition::uniform(4).refines(p));
    CHECK_THROWS_AS(DeliveryPartition::from_breakpoints({0.0, 3.0, 2.0, kTwoPi}), Error);
    CHECK_THROWS_AS(DeliveryPartition::from_breakpoints({0.1, kTwoPi}), Error);
    const auto uneven = DeliveryPartition::from_breakpoints({0.0, kTwoPi / 4, kTwoPi});
    CHECK(uneven.average_weights()(0) == doctest::Approx(0.25));
    const auto w = observation_weights(uneven, 96);
    CHECK(w.A.rows() == 2);
    CHECK(w.A.row(0).sum() == doctest::Approx(1.0));
    CHECK_THROWS_AS(observation_weights(DeliveryPartition::from_breakpoints({0.0, 1.0, kTwoPi}), 96), Error);
}

namespace {

std::string hourly_csv(const std::string& first_day, int days, const std::string& zone) {
    std::string out = "timestamp,zone,price\n";
    const auto utc = TimeZone::named("UTC");
    const Date start = parse_date(first_day);
    for (int n = 0; n < days; ++n) {
        for (int h = 0; h < 24; ++h) {
            out += fmt::format("{} {:02}:00,{},{}\n", format_date(add_days(start, n)), h, zone, 100 * n + h);
        }
    }
    (void)utc;
    return out;
}

} // namespace

TEST_CASE("hourly UTC export becomes a days x 24 panel") {
    std::istringstream in(hourly_csv("2024-01-01", 3, "DE"));
    const auto raw = parse_price_csv(in, {});
    CHECK(raw.records.size() == 72);
    const auto panel = build_panel(raw, "DE", DeliveryPartition::uniform(24), TimeZone::named("UTC"));
    CHECK(panel.rows() == 3);
    CHECK(panel.values()(2, 5) == 205.0);
    CHECK(daily_average(panel)(1) == doctest::Approx(111.5));
    const auto coarse = aggregate_to_partition(panel, DeliveryPartition::uniform(4));
    CHECK(coarse.values()(0, 0) == doctest::Approx(2.5));
    CHECK(coarse.values()(1, 3) == doctest::Approx(120.5));
    CHECK_THROWS_AS(aggregate_to_partition(coarse, DeliveryPartition::uniform(24)), Error);
}

TEST_CASE("duplicates keep the last row and are logged") {
    std::istringstream in("timestamp;price\n2024-01-01 00:00;5\n2024-01-01 00:00;7\n");
    CsvSchema schema;
    schema.default_zone = "FR";
    const auto raw = parse_price_csv(in, schema);
    REQUIRE(raw.records.size() == 1);
    CHECK(raw.duplicates == 1);
    CHECK(raw.records[0].price == 7.0);
    CHECK(raw.records[0].duplicate);
}

TEST_CASE("DST days are repaired in market time") {
    // Local hourly prices for Europe/Berlin around the spring and autumn changes.
    const auto berlin = TimeZone::named("Europe/Berlin");
    std::string csv = "timestamp,zone,price\n";
    for (const char* day : {"2024-03-30", "2024-03-31", "2024-04-01"}) {
        for (int h = 0; h < 24; ++h) {
            if (std::string(day) == "2024-03-31" && h == 2) {
                continue;
            }
            csv += fmt::format("{} {:02}:00,DE,{}\n", day, h, h);
        }
    }
    std::istringstream in(csv);
    CsvSchema schema;
    schema.source_timezone = "Europe/Berlin";
    const auto raw = parse_price_csv(in, schema);
    const auto panel = build_panel(raw, "DE", DeliveryPartition::uniform(24), berlin);
    REQUIRE(panel.rows() == 3);
    CHECK(panel.values()(1, 2) == doctest::Approx(2.0));
    CHECK(panel.dst_log().size() == 1);
    CHECK(panel.dst_log()[0].action == DstAction::ImputedMissing);
    CHECK(panel.dst_log()[0].bin == 2);
    CHECK_THROWS_AS(build_panel(raw, "DE", DeliveryPartition::uniform(24), berlin, DstPolicy::Reject), Error);
}

TEST_CASE("autumn repeated hour is merged") {
    std::vector<DstLogEntry> log;
    DaySlots slots(24);
    for (std::size_t b = 0; b < 24; ++b) {
        slots[b].push_back(static_cast<double>(b));
    }
    slots[2].push_back(4.0);
    const auto row = resolve_day(slots, parse_date("2024-10-27"), {}, {2}, log);
    CHECK(row(2) == doctest::Approx(3.0));
    CHECK(log.size() == 1);
    CHECK(log[0].action == DstAction::MergedRepeated);

    std::vector<DstLogEntry> again;
    DaySlots regular(24);
    for (std::size_t b = 0; b < 24; ++b) {
        regular[b].push_back(row(static_cast<Eigen::Index>(b)));
    }
    const auto same = resolve_day(regular, parse_date("2024-10-27"), {}, {2}, again);
    CHECK(same.isApprox(row));
    CHECK(again.empty());
}

TEST_CASE("missing day is an error") {
    std::istringstream in("timestamp,zone,price\n2024-01-01 00:00,DE,1\n2024-01-03 00:00,DE,1\n");
    const auto raw = parse_price_csv(in, {});
    CHECK_THROWS_AS(build_panel(raw, "DE", DeliveryPartition::uniform(1), TimeZone::named("UTC")), Error);
}

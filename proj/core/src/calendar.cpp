#include "elvol/calendar.hpp"

#include "elvol/common.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cstdlib>

namespace elvol {

namespace chr = std::chrono;

namespace {

int parse_int(std::string_view text, std::string_view what, std::string_view whole) {
    int value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw Error(fmt::format("invalid {} in '{}'", what, whole));
    }
    return value;
}

Instant eu_spring_switch(chr::year y) {
    return chr::sys_days{y / chr::March / chr::Sunday[chr::last]} + chr::hours{1};
}

Instant eu_autumn_switch(chr::year y) {
    return chr::sys_days{y / chr::October / chr::Sunday[chr::last]} + chr::hours{1};
}

struct ZoneEntry {
    std::string_view name;
    int standard_offset_hours;
};

constexpr std::array<ZoneEntry, 24> kEuZones{{
    {"CET", 1},               {"Europe/Berlin", 1},    {"Europe/Oslo", 1},
    {"Europe/Madrid", 1},     {"Europe/Paris", 1},     {"Europe/Amsterdam", 1},
    {"Europe/Brussels", 1},   {"Europe/Vienna", 1},    {"Europe/Copenhagen", 1},
    {"Europe/Stockholm", 1},  {"Europe/Rome", 1},      {"Europe/Warsaw", 1},
    {"Europe/Prague", 1},     {"Europe/Zurich", 1},    {"Europe/Budapest", 1},
    {"Europe/Luxembourg", 1}, {"WET", 0},              {"Europe/Lisbon", 0},
    {"Europe/London", 0},     {"Europe/Dublin", 0},    {"EET", 2},
    {"Europe/Helsinki", 2},   {"Europe/Athens", 2},    {"Europe/Tallinn", 2},
}};

} // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(fmt::format("invalid date '{}' (expected YYYY-MM-DD)", text));
    }
    const int y = parse_int(text.substr(0, 4), "year", text);
    const int m = parse_int(text.substr(5, 2), "month", text);
    const int d = parse_int(text.substr(8, 2), "day", text);
    Date date{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw Error(fmt::format("invalid calendar date '{}'", text));
    }
    return date;
}

std::string format_date(Date date) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                       static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

Date add_days(Date date, long days) {
    return Date{chr::sys_days{date} + chr::days{days}};
}

long days_between(Date from, Date to) {
    return (chr::sys_days{to} - chr::sys_days{from}).count();
}

int weekday_index(Date date) {
    // iso_encoding: Monday = 1 ... Sunday = 7
    return static_cast<int>(chr::weekday{chr::sys_days{date}}.iso_encoding()) - 1;
}

TimeZone TimeZone::named(std::string_view name) {
    if (name == "UTC" || name == "Z" || name == "Etc/UTC" || name == "GMT") {
        return TimeZone(std::string(name), chr::seconds{0}, false);
    }
    if (name.size() == 6 && (name[0] == '+' || name[0] == '-') && name[3] == ':') {
        const int hh = parse_int(name.substr(1, 2), "offset hours", name);
        const int mm = parse_int(name.substr(4, 2), "offset minutes", name);
        if (hh > 14 || mm > 59) {
            throw Error(fmt::format("unknown timezone '{}'", name));
        }
        const int sign = name[0] == '-' ? -1 : 1;
        return TimeZone(std::string(name), chr::seconds{sign * (hh * 3600 + mm * 60)}, false);
    }
    for (const auto& zone : kEuZones) {
        if (zone.name == name) {
            return TimeZone(std::string(name), chr::hours{zone.standard_offset_hours}, true);
        }
    }
    throw Error(fmt::format("unknown timezone '{}'", name));
}

chr::seconds TimeZone::offset_at(Instant utc) const {
    if (!eu_rule_) {
        return standard_offset_;
    }
    const chr::year y = Date{chr::floor<chr::days>(utc)}.year();
    const bool summer = utc >= eu_spring_switch(y) && utc < eu_autumn_switch(y);
    return standard_offset_ + (summer ? chr::seconds{3600} : chr::seconds{0});
}

std::pair<Date, chr::seconds> TimeZone::to_local(Instant utc) const {
    const Instant local = utc + offset_at(utc);
    const auto day = chr::floor<chr::days>(local);
    return {Date{day}, chr::duration_cast<chr::seconds>(local - day)};
}

Instant TimeZone::from_local(Date date, chr::seconds time_of_day) const {
    const Instant local = chr::sys_days{date} + time_of_day;
    const chr::seconds candidates[2] = {standard_offset_ + chr::seconds{eu_rule_ ? 3600 : 0},
                                        standard_offset_};
    for (const auto offset : candidates) {
        const Instant utc = local - offset;
        if (offset_at(utc) == offset) {
            return utc;
        }
    }
    throw Error(fmt::format("local time {} {}s does not exist in zone {}", format_date(date),
                            time_of_day.count(), name_));
}

std::optional<DstTransition> TimeZone::transition_on(Date local_date) const {
    if (!eu_rule_) {
        return std::nullopt;
    }
    const chr::seconds local_start = chr::hours{1} + standard_offset_;
    const auto y = local_date.year();
    const Date spring{chr::floor<chr::days>(eu_spring_switch(y) + standard_offset_)};
    const Date autumn{chr::floor<chr::days>(eu_autumn_switch(y) + standard_offset_)};
    if (local_date == spring) {
        return DstTransition{DstTransition::Kind::Spring, local_start, chr::hours{1}};
    }
    if (local_date == autumn) {
        return DstTransition{DstTransition::Kind::Autumn, local_start, chr::hours{1}};
    }
    return std::nullopt;
}

chr::seconds TimeZone::day_length(Date local_date) const {
    const auto t = transition_on(local_date);
    if (!t) {
        return chr::hours{24};
    }
    return t->kind == DstTransition::Kind::Spring ? chr::hours{24} - t->length
                                                   : chr::hours{24} + t->length;
}

Instant parse_timestamp(std::string_view text, const TimeZone& naive_zone) {
    auto trimmed = text;
    while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\r')) {
        trimmed.remove_suffix(1);
    }
    if (trimmed.size() < 16 || (trimmed[10] != 'T' && trimmed[10] != ' ') || trimmed[13] != ':') {
        throw Error(fmt::format("invalid timestamp '{}'", text));
    }
    const Date date = parse_date(trimmed.substr(0, 10));
    const int hh = parse_int(trimmed.substr(11, 2), "hour", text);
    const int mi = parse_int(trimmed.substr(14, 2), "minute", text);
    int ss = 0;
    std::size_t pos = 16;
    if (pos < trimmed.size() && trimmed[pos] == ':') {
        if (trimmed.size() < pos + 3) {
            throw Error(fmt::format("invalid timestamp '{}'", text));
        }
        ss = parse_int(trimmed.substr(pos + 1, 2), "second", text);
        pos += 3;
        // fractional seconds are accepted and dropped
        if (pos < trimmed.size() && trimmed[pos] == '.') {
            ++pos;
            while (pos < trimmed.size() && trimmed[pos] >= '0' && trimmed[pos] <= '9') {
                ++pos;
            }
        }
    }
    if (hh > 24 || mi > 59 || ss > 60) {
        throw Error(fmt::format("invalid time of day in '{}'", text));
    }
    const chr::seconds tod{hh * 3600 + mi * 60 + ss};
    const auto rest = trimmed.substr(pos);
    if (rest.empty()) {
        return naive_zone.from_local(date, tod);
    }
    if (rest == "Z" || rest == "z") {
        return chr::sys_days{date} + tod;
    }
    if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
        const int oh = parse_int(rest.substr(1, 2), "offset hours", text);
        const int om = parse_int(rest.substr(4, 2), "offset minutes", text);
        const int sign = rest[0] == '-' ? -1 : 1;
        return chr::sys_days{date} + tod - chr::seconds{sign * (oh * 3600 + om * 60)};
    }
    throw Error(fmt::format("invalid timestamp offset in '{}'", text));
}

} // namespace elvol

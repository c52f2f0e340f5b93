#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace elvol {

using Date = std::chrono::year_month_day;
using Instant = std::chrono::sys_seconds;

Date parse_date(std::string_view text);
std::string format_date(Date date);
Date add_days(Date date, long days);
long days_between(Date from, Date to);

/// 0 = Monday ... 6 = Sunday.
int weekday_index(Date date);

/// Clock change on a local calendar date. For a spring transition the local
/// interval [local_start, local_start + length) does not exist; for an autumn
/// transition it occurs twice.
struct DstTransition {
    enum class Kind { Spring, Autumn };
    Kind kind;
    std::chrono::seconds local_start; // seconds after local midnight
    std::chrono::seconds length;
};

/// Minimal civil-time zone: UTC, fixed offsets, and the European zones that
/// follow the EU summer-time rule (last Sunday of March and October, 01:00 UTC).
class TimeZone {
public:
    /// Accepts "UTC", "Z", "+HH:MM"/"-HH:MM", "CET", "EET", "WET" and the usual
    /// "Europe/<City>" names of EU market areas. Unknown names throw elvol::Error.
    static TimeZone named(std::string_view name);

    const std::string& name() const { return name_; }
    bool observes_dst() const { return eu_rule_; }

    std::chrono::seconds offset_at(Instant utc) const;

    /// Local calendar date and seconds after local midnight for an instant.
    std::pair<Date, std::chrono::seconds> to_local(Instant utc) const;

    /// Maps a naive local wall-clock reading to UTC. Readings inside a skipped
    /// interval throw; repeated readings resolve to the earlier instant.
    Instant from_local(Date date, std::chrono::seconds time_of_day) const;

    std::optional<DstTransition> transition_on(Date local_date) const;

    /// Length of the local civil day (23h, 24h or 25h).
    std::chrono::seconds day_length(Date local_date) const;

private:
    TimeZone(std::string name, std::chrono::seconds standard_offset, bool eu_rule)
        : name_(std::move(name)), standard_offset_(standard_offset), eu_rule_(eu_rule) {}

    std::string name_;
    std::chrono::seconds standard_offset_;
    bool eu_rule_;
};

/// Parses "YYYY-MM-DD HH:MM[:SS]" or RFC-3339 ("YYYY-MM-DDTHH:MM[:SS][Z|+HH:MM]").
/// Readings without an explicit offset are interpreted in `naive_zone`.
Instant parse_timestamp(std::string_view text, const TimeZone& naive_zone);

} // namespace elvol

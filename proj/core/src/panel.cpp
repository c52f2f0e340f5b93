#include "elvol/panel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

namespace elvol {

namespace chr = std::chrono;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<double> parse_price(std::string text, char delim) {
    if (delim == ';') {
        std::replace(text.begin(), text.end(), ',', '.');
    }
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? header.size() : static_cast<std::size_t>(it - header.begin());
}

long day_number(Date date) {
    return chr::sys_days{date}.time_since_epoch().count();
}

} // namespace

std::string to_string(DstAction action) {
    switch (action) {
    case DstAction::ImputedMissing:
        return "imputed_missing";
    case DstAction::MergedRepeated:
        return "merged_repeated";
    case DstAction::DuplicateReplaced:
        return "duplicate_replaced";
    }
    return "unknown";
}

RawRecords parse_price_csv(std::istream& source, const CsvSchema& schema) {
    RawRecords out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    char delim = ',';
    while (std::getline(source, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            break;
        }
    }
    if (trim(line).empty()) {
        return out;
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    delim = std::count(line.begin(), line.end(), ';') > std::count(line.begin(), line.end(), ',') ? ';' : ',';
    for (auto& h : split_line(line, delim)) {
        header.push_back(trim(h));
    }
    const std::size_t ts_col = column_index(header, schema.timestamp_column);
    const std::size_t price_col = column_index(header, schema.price_column);
    const std::size_t zone_col = column_index(header, schema.zone_column);
    if (ts_col == header.size()) {
        throw Error(fmt::format("line {}: header lacks timestamp column '{}'", line_no, schema.timestamp_column));
    }
    if (price_col == header.size()) {
        throw Error(fmt::format("line {}: header lacks price column '{}'", line_no, schema.price_column));
    }
    if (zone_col == header.size() && schema.default_zone.empty()) {
        throw Error(fmt::format("line {}: header lacks zone column '{}' and no default zone is set", line_no,
                                schema.zone_column));
    }
    const TimeZone naive_zone = TimeZone::named(schema.source_timezone);

    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_line(line, delim);
        if (fields.size() != header.size()) {
            throw Error(fmt::format("line {}: expected {} fields, found {}", line_no, header.size(), fields.size()));
        }
        PriceRecord rec;
        rec.line = line_no;
        try {
            rec.timestamp = parse_timestamp(trim(fields[ts_col]), naive_zone);
        } catch (const Error& e) {
            throw Error(fmt::format("line {}: {}", line_no, e.what()));
        }
        const auto price = parse_price(trim(fields[price_col]), delim);
        if (!price) {
            throw Error(fmt::format("line {}: invalid price '{}'", line_no, fields[price_col]));
        }
        rec.price = *price;
        rec.zone = zone_col == header.size() ? schema.default_zone : trim(fields[zone_col]);
        out.records.push_back(std::move(rec));
    }

    std::stable_sort(out.records.begin(), out.records.end(), [](const PriceRecord& a, const PriceRecord& b) {
        return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.zone < b.zone;
    });
    std::vector<PriceRecord> unique;
    unique.reserve(out.records.size());
    for (auto& rec : out.records) {
        if (!unique.empty() && unique.back().timestamp == rec.timestamp && unique.back().zone == rec.zone) {
            rec.duplicate = true;
            unique.back() = std::move(rec);
            ++out.duplicates;
        } else {
            unique.push_back(std::move(rec));
        }
    }
    out.records = std::move(unique);
    return out;
}

PricePanel::PricePanel(std::vector<Date> dates, Matrix values, DeliveryPartition partition, std::string zone,
                       std::vector<DstLogEntry> dst_log)
    : dates_(std::move(dates)),
      values_(std::move(values)),
      partition_(std::move(partition)),
      zone_(std::move(zone)),
      dst_log_(std::move(dst_log)) {
    if (static_cast<std::size_t>(values_.rows()) != dates_.size()) {
        throw Error(fmt::format("panel has {} dates but {} rows", dates_.size(), values_.rows()));
    }
    if (static_cast<std::size_t>(values_.cols()) != partition_.size()) {
        throw Error(fmt::format("panel rows have {} entries but the partition has {} bins", values_.cols(),
                                partition_.size()));
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (days_between(dates_[i - 1], dates_[i]) != 1) {
            throw Error(fmt::format("panel dates are not consecutive at {}", format_date(dates_[i])));
        }
    }
    if (!values_.allFinite()) {
        throw Error("panel contains missing or non-finite values");
    }
}

Vector resolve_day(const DaySlots& slots, Date date, const std::vector<std::size_t>& skipped_bins,
                   const std::vector<std::size_t>& repeated_bins, std::vector<DstLogEntry>& log) {
    const std::size_t d = slots.size();
    const auto contains = [](const std::vector<std::size_t>& v, std::size_t i) {
        return std::find(v.begin(), v.end(), i) != v.end();
    };
    Vector row = Vector::Constant(static_cast<Eigen::Index>(d), std::nan(""));
    std::vector<std::size_t> to_impute;
    for (std::size_t b = 0; b < d; ++b) {
        const auto& obs = slots[b];
        const auto idx = static_cast<Eigen::Index>(b);
        if (obs.size() == 1) {
            row[idx] = obs.front();
        } else if (obs.size() == 2 && contains(repeated_bins, b)) {
            row[idx] = 0.5 * (obs[0] + obs[1]);
            log.push_back({date, DstAction::MergedRepeated, b,
                           fmt::format("merged {:.17g} and {:.17g}", obs[0], obs[1])});
        } else if (obs.empty() && contains(skipped_bins, b)) {
            to_impute.push_back(b);
        } else {
            throw Error(fmt::format("{}: bin {} has {} observations", format_date(date), b + 1, obs.size()));
        }
    }
    std::vector<std::pair<std::size_t, double>> imputed;
    for (std::size_t b : to_impute) {
        std::size_t lo = b;
        while (lo > 0 && std::isnan(row[static_cast<Eigen::Index>(lo)])) {
            --lo;
        }
        std::size_t hi = b;
        while (hi + 1 < d && std::isnan(row[static_cast<Eigen::Index>(hi)])) {
            ++hi;
        }
        const double before = row[static_cast<Eigen::Index>(lo)];
        const double after = row[static_cast<Eigen::Index>(hi)];
        if (std::isnan(before) || std::isnan(after)) {
            throw Error(fmt::format("{}: cannot impute bin {} without neighbours on both sides", format_date(date),
                                    b + 1));
        }
        imputed.emplace_back(b, 0.5 * (before + after));
        log.push_back({date, DstAction::ImputedMissing, b,
                       fmt::format("mean of {:.17g} and {:.17g}", before, after)});
    }
    for (const auto& [b, value] : imputed) {
        row[static_cast<Eigen::Index>(b)] = value;
    }
    return row;
}

PricePanel build_panel(const RawRecords& records, const std::string& zone, const DeliveryPartition& partition,
                       const TimeZone& market_zone, DstPolicy policy) {
    const std::size_t d = partition.size();
    std::map<long, DaySlots> days;
    std::vector<DstLogEntry> log;
    std::vector<std::pair<Instant, std::size_t>> duplicate_marks;
    for (const auto& rec : records.records) {
        if (rec.zone != zone) {
            continue;
        }
        const auto [date, tod] = market_zone.to_local(rec.timestamp);
        const double angle = kTwoPi * static_cast<double>(tod.count()) / 86400.0;
        const std::size_t bin = partition.breakpoint_index(angle);
        if (bin >= d) {
            throw Error(fmt::format("line {}: local time {}s on {} is not a delivery-period start", rec.line,
                                    tod.count(), format_date(date)));
        }
        auto& slots = days[day_number(date)];
        if (slots.empty()) {
            slots.resize(d);
        }
        slots[bin].push_back(rec.price);
        if (rec.duplicate) {
            log.push_back({date, DstAction::DuplicateReplaced, bin,
                           fmt::format("line {} replaced an earlier row", rec.line)});
        }
    }
    if (days.empty()) {
        throw Error(fmt::format("no records for zone '{}'", zone));
    }

    const long first = days.begin()->first;
    const long last = days.rbegin()->first;
    std::vector<Date> dates;
    Matrix values(static_cast<Eigen::Index>(last - first + 1), static_cast<Eigen::Index>(d));
    for (long n = first; n <= last; ++n) {
        const Date date{chr::sys_days{chr::days{n}}};
        const auto it = days.find(n);
        if (it == days.end()) {
            throw Error(fmt::format("zone '{}' has no observations on {}", zone, format_date(date)));
        }
        std::vector<std::size_t> skipped;
        std::vector<std::size_t> repeated;
        if (const auto tr = market_zone.transition_on(date)) {
            const double lo = kTwoPi * static_cast<double>(tr->local_start.count()) / 86400.0;
            const double hi = kTwoPi * static_cast<double>((tr->local_start + tr->length).count()) / 86400.0;
            for (std::size_t b = 0; b < d; ++b) {
                if (partition.start(b) >= lo - 1e-9 && partition.start(b) < hi - 1e-9) {
                    (tr->kind == DstTransition::Kind::Spring ? skipped : repeated).push_back(b);
                }
            }
            if (policy == DstPolicy::Reject) {
                skipped.clear();
                repeated.clear();
            }
        }
        values.row(static_cast<Eigen::Index>(n - first)) = resolve_day(it->second, date, skipped, repeated, log);
        dates.push_back(date);
    }
    return PricePanel(std::move(dates), std::move(values), partition, zone, std::move(log));
}

PricePanel aggregate_to_partition(const PricePanel& panel, const DeliveryPartition& coarse) {
    const auto& fine = panel.partition();
    if (!fine.refines(coarse)) {
        throw Error("coarse partition is not nested in the panel's partition");
    }
    Matrix map = Matrix::Zero(static_cast<Eigen::Index>(fine.size()), static_cast<Eigen::Index>(coarse.size()));
    for (std::size_t j = 0; j < coarse.size(); ++j) {
        const std::size_t lo = fine.breakpoint_index(coarse.start(j));
        const std::size_t hi = fine.breakpoint_index(coarse.end(j));
        for (std::size_t i = lo; i < hi; ++i) {
            map(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fine.width(i) / coarse.width(j);
        }
    }
    Matrix values = panel.values() * map;
    return PricePanel(panel.dates(), std::move(values), coarse, panel.zone(), panel.dst_log());
}

Vector daily_average(const PricePanel& panel) {
    return panel.values() * panel.partition().average_weights();
}

} // namespace elvol

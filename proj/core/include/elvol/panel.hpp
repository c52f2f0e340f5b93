#pragma once

#include "elvol/calendar.hpp"
#include "elvol/common.hpp"
#include "elvol/partition.hpp"

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace elvol {

/// Column mapping for delimited price exports.
struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::string zone_column = "zone";   // may be absent from the file
    std::string price_column = "price";
    std::string default_zone;           // used when zone_column is absent
    std::string source_timezone = "UTC"; // zone of timestamps without offset
};

struct PriceRecord {
    Instant timestamp;
    std::string zone;
    double price = 0.0;
    std::size_t line = 0;
    bool duplicate = false; // a later row for the same (zone, timestamp) replaced an earlier one
};

struct RawRecords {
    std::vector<PriceRecord> records; // sorted by (timestamp, zone)
    std::size_t duplicates = 0;
};

/// Reads comma- or semicolon-delimited text with a header row. Duplicate
/// (zone, timestamp) pairs keep the last occurrence and are flagged.
RawRecords parse_price_csv(std::istream& source, const CsvSchema& schema);

enum class DstAction { ImputedMissing, MergedRepeated, DuplicateReplaced };

std::string to_string(DstAction action);

struct DstLogEntry {
    Date date;
    DstAction action;
    std::size_t bin = 0;
    std::string detail;
};

enum class DstPolicy {
    Repair, // impute 23-hour days and merge 25-hour days
    Reject  // any day whose bin count differs from the partition is an error
};

/// Daily x delivery-period grid of local-average prices. Immutable once built.
class PricePanel {
public:
    PricePanel(std::vector<Date> dates, Matrix values, DeliveryPartition partition, std::string zone,
               std::vector<DstLogEntry> dst_log = {});

    const std::vector<Date>& dates() const { return dates_; }
    const Matrix& values() const { return values_; }
    const DeliveryPartition& partition() const { return partition_; }
    const std::string& zone() const { return zone_; }
    const std::vector<DstLogEntry>& dst_log() const { return dst_log_; }

    std::size_t rows() const { return dates_.size(); }
    std::size_t bins() const { return partition_.size(); }

private:
    std::vector<Date> dates_;
    Matrix values_;
    DeliveryPartition partition_;
    std::string zone_;
    std::vector<DstLogEntry> dst_log_;
};

/// Observations that landed in each bin of one local day.
using DaySlots = std::vector<std::vector<double>>;

/// Resolves one day's slots into a row. Slots inside a skipped DST interval
/// are imputed from the neighbouring bins, slots inside a repeated interval
/// are averaged. Applying it to an already regular day is a no-op. Appends
/// to `log` for every repaired cell.
Vector resolve_day(const DaySlots& slots, Date date, const std::vector<std::size_t>& skipped_bins,
                   const std::vector<std::size_t>& repeated_bins, std::vector<DstLogEntry>& log);

/// Materializes the panel of `zone` in the market's local civil time.
PricePanel build_panel(const RawRecords& records, const std::string& zone,
                       const DeliveryPartition& partition, const TimeZone& market_zone,
                       DstPolicy policy = DstPolicy::Repair);

/// Width-weighted averaging onto a coarser nested partition.
PricePanel aggregate_to_partition(const PricePanel& panel, const DeliveryPartition& coarse);

/// Daily average price, avg_weights . row, for every date.
Vector daily_average(const PricePanel& panel);

} // namespace elvol

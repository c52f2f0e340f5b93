#pragma once

#include "elvol/panel.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace elvol {

/// Shortest text that round-trips a double ("%.17g").
std::string format_number(double value);

/// Wide layout: "date,h01,...,hNN", one row per date.
void write_panel_csv(std::ostream& out, const PricePanel& panel);

/// Sidecar with zone, partition (breakpoints + labels) and the DST audit log.
std::string panel_sidecar_json(const PricePanel& panel);

PricePanel read_panel(std::istream& csv, std::istream& sidecar_json);

void save_panel(const PricePanel& panel, const std::filesystem::path& csv_path,
                const std::filesystem::path& json_path);
PricePanel load_panel(const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

/// Writes a date-indexed matrix in the wide panel layout (used for detrend output).
void write_dated_matrix_csv(std::ostream& out, const std::vector<Date>& dates, const Matrix& values,
                            const std::vector<std::string>& labels);

struct DatedMatrix {
    std::vector<Date> dates;
    Matrix values;
    std::vector<std::string> labels;
};

/// Reads the wide layout written by write_dated_matrix_csv ("nan" cells allowed).
DatedMatrix read_dated_matrix_csv(std::istream& csv);

} // namespace elvol

#include "elvol/panel_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace elvol {

using nlohmann::json;

std::string format_number(double value) {
    return fmt::format("{:.17g}", value);
}

void write_dated_matrix_csv(std::ostream& out, const std::vector<Date>& dates, const Matrix& values,
                            const std::vector<std::string>& labels) {
    out << "date";
    for (const auto& label : labels) {
        out << ',' << label;
    }
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        out << format_date(dates[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            out << ',' << format_number(values(r, c));
        }
        out << '\n';
    }
}

void write_panel_csv(std::ostream& out, const PricePanel& panel) {
    write_dated_matrix_csv(out, panel.dates(), panel.values(), panel.partition().labels());
}

std::string panel_sidecar_json(const PricePanel& panel) {
    json doc;
    doc["zone"] = panel.zone();
    doc["partition"]["breakpoints"] = std::vector<double>(panel.partition().breakpoints().begin(),
                                                          panel.partition().breakpoints().end());
    doc["partition"]["labels"] = panel.partition().labels();
    json log = json::array();
    for (const auto& entry : panel.dst_log()) {
        log.push_back({{"date", format_date(entry.date)},
                       {"action", to_string(entry.action)},
                       {"bin", entry.bin + 1},
                       {"detail", entry.detail}});
    }
    doc["dst_log"] = std::move(log);
    return doc.dump(2);
}

DatedMatrix read_dated_matrix_csv(std::istream& csv) {
    std::string line;
    if (!std::getline(csv, line)) {
        throw Error("dated csv is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    DatedMatrix out;
    {
        std::stringstream header(line);
        std::string cell;
        std::getline(header, cell, ',');
        while (std::getline(header, cell, ',')) {
            out.labels.push_back(cell);
        }
    }
    const std::size_t d = out.labels.size();
    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        out.dates.push_back(parse_date(cell));
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                flat.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw Error(fmt::format("csv line {}: invalid number '{}'", line_no, cell));
            }
            ++count;
        }
        if (count != d) {
            throw Error(fmt::format("csv line {}: expected {} values, found {}", line_no, d, count));
        }
    }
    out.values.resize(static_cast<Eigen::Index>(out.dates.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < out.dates.size(); ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * d + c];
        }
    }
    return out;
}

namespace {

DstAction parse_action(const std::string& text) {
    if (text == "imputed_missing") {
        return DstAction::ImputedMissing;
    }
    if (text == "merged_repeated") {
        return DstAction::MergedRepeated;
    }
    if (text == "duplicate_replaced") {
        return DstAction::DuplicateReplaced;
    }
    throw Error(fmt::format("unknown dst_log action '{}'", text));
}

} // namespace

PricePanel read_panel(std::istream& csv, std::istream& sidecar_json) {
    json doc;
    try {
        sidecar_json >> doc;
    } catch (const json::exception& e) {
        throw Error(fmt::format("panel sidecar: {}", e.what()));
    }
    auto partition = DeliveryPartition::from_breakpoints(doc.at("partition").at("breakpoints").get<std::vector<double>>(),
                                                         doc.at("partition").at("labels").get<std::vector<std::string>>());
    std::vector<DstLogEntry> log;
    for (const auto& entry : doc.at("dst_log")) {
        log.push_back({parse_date(entry.at("date").get<std::string>()), parse_action(entry.at("action").get<std::string>()),
                       entry.at("bin").get<std::size_t>() - 1, entry.at("detail").get<std::string>()});
    }

    auto table = read_dated_matrix_csv(csv);
    if (table.labels.size() != partition.size()) {
        throw Error(fmt::format("panel csv has {} value columns, partition has {} bins", table.labels.size(),
                                partition.size()));
    }
    auto dates = std::move(table.dates);
    auto values = std::move(table.values);
    return PricePanel(std::move(dates), std::move(values), std::move(partition), doc.at("zone").get<std::string>(),
                      std::move(log));
}

void save_panel(const PricePanel& panel, const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    std::ofstream csv(csv_path);
    if (!csv) {
        throw Error(fmt::format("cannot write {}", csv_path.string()));
    }
    write_panel_csv(csv, panel);
    std::ofstream js(json_path);
    if (!js) {
        throw Error(fmt::format("cannot write {}", json_path.string()));
    }
    js << panel_sidecar_json(panel) << '\n';
}

PricePanel load_panel(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
    std::ifstream csv(csv_path);
    if (!csv) {
        throw Error(fmt::format("cannot read {}", csv_path.string()));
    }
    std::ifstream js(json_path);
    if (!js) {
        throw Error(fmt::format("cannot read {}", json_path.string()));
    }
    return read_panel(csv, js);
}

} // namespace elvol

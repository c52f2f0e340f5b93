#include "elvol/series_io.hpp"

#include "elvol/panel_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <map>
#include <sstream>

namespace elvol {

using nlohmann::json;

void write_rcv_long_csv(std::ostream& out, const RcvSeries& series) {
    out << "date,i,j,value\n";
    const auto d = static_cast<Eigen::Index>(series.dim());
    for (std::size_t k = 0; k < series.size(); ++k) {
        const std::string date = k < series.dates.size() ? format_date(series.dates[k]) : std::to_string(k);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = i; j < d; ++j) {
                out << date << ',' << i + 1 << ',' << j + 1 << ',' << format_number(series.mats[k](i, j)) << '\n';
            }
        }
    }
}

std::string rcv_manifest_json(const RcvSeries& series) {
    json doc;
    doc["window"] = series.window;
    doc["delta"] = series.delta;
    doc["adjusted"] = series.adjusted;
    doc["rolling"] = series.rolling;
    doc["dimension"] = series.dim();
    doc["windows"] = series.size();
    return doc.dump(2);
}

RcvSeries read_rcv(std::istream& long_csv, std::istream& manifest_json) {
    json doc;
    try {
        manifest_json >> doc;
    } catch (const json::exception& e) {
        throw Error(fmt::format("RCV manifest: {}", e.what()));
    }
    RcvSeries s;
    s.window = doc.at("window").get<std::size_t>();
    s.delta = doc.at("delta").get<double>();
    s.adjusted = doc.at("adjusted").get<bool>();
    s.rolling = doc.at("rolling").get<bool>();
    const auto d = doc.at("dimension").get<Eigen::Index>();
    std::string line;
    std::getline(long_csv, line);
    std::size_t line_no = 1;
    std::string current;
    while (std::getline(long_csv, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string date;
        std::string i;
        std::string j;
        std::string value;
        std::getline(ss, date, ',');
        std::getline(ss, i, ',');
        std::getline(ss, j, ',');
        std::getline(ss, value, ',');
        if (date != current) {
            current = date;
            s.dates.push_back(parse_date(date));
            s.mats.push_back(Matrix::Zero(d, d));
        }
        try {
            const auto r = std::stol(i) - 1;
            const auto c = std::stol(j) - 1;
            if (r < 0 || c < 0 || r >= d || c >= d) {
                throw Error("index out of range");
            }
            const double v = std::stod(value);
            s.mats.back()(r, c) = v;
            s.mats.back()(c, r) = v;
        } catch (const std::exception&) {
            throw Error(fmt::format("RCV csv line {}: malformed entry '{}'", line_no, line));
        }
    }
    return s;
}

void write_log_diagonal_csv(std::ostream& out, const RcvSeries& series, const std::vector<std::string>& labels) {
    Matrix logs(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(series.dim()));
    for (std::size_t k = 0; k < series.size(); ++k) {
        for (Eigen::Index h = 0; h < logs.cols(); ++h) {
            const double v = series.mats[k](h, h);
            logs(static_cast<Eigen::Index>(k), h) = v > 0.0 ? std::log(v) : std::numeric_limits<double>::quiet_NaN();
        }
    }
    write_dated_matrix_csv(out, series.dates, logs, labels);
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels) {
    out << "row";
    for (const auto& c : col_labels) {
        out << ',' << c;
    }
    out << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out << (static_cast<std::size_t>(r) < row_labels.size() ? row_labels[static_cast<std::size_t>(r)]
                                                                 : std::to_string(r + 1));
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << ',' << format_number(m(r, c));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        rows.emplace_back();
        while (std::getline(ss, cell, ',')) {
            rows.back().push_back(std::stod(cell));
        }
    }
    if (rows.empty()) {
        return Matrix(0, 0);
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) {
            throw Error("matrix csv has ragged rows");
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

} // namespace elvol

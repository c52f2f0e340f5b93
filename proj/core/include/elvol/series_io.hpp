#pragma once

#include "elvol/rcv.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace elvol {

/// Long layout "date,i,j,value" with 1-based i <= j (upper triangle).
void write_rcv_long_csv(std::ostream& out, const RcvSeries& series);

/// JSON manifest with window, delta, adjusted, rolling and the dimension.
std::string rcv_manifest_json(const RcvSeries& series);

RcvSeries read_rcv(std::istream& long_csv, std::istream& manifest_json);

/// "date,<labels>" rows of log diagonal entries (NaN where the diagonal is not positive).
void write_log_diagonal_csv(std::ostream& out, const RcvSeries& series, const std::vector<std::string>& labels);

/// Square or rectangular matrix with a header row of column labels and a
/// leading column of row labels.
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels);
Matrix read_matrix_csv(std::istream& in);

} // namespace elvol

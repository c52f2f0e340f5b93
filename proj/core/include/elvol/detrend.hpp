#pragma once

#include "elvol/panel.hpp"

#include <string>
#include <vector>

namespace elvol {

/// (3/4)(1 - u^2) on [-1, 1], zero outside.
double epanechnikov(double u);

struct DetrendConfig {
    double bandwidth_days = 90.0;
    bool dow_dummies = true; // six dummies, Monday is the reference day
};

/// Output of the causal local-linear mean regression.
///
/// For every date n the fit uses only rows k < n with weights
/// K((n - k) / bandwidth_days) and regressors {1, k - n, dummies}; the fitted
/// mean mhat_n is the intercept plus date n's own dummy. Rows before
/// `valid_from` have an incomplete kernel window and carry NaN.
struct DemeanedPanel {
    std::vector<Date> dates;
    Matrix values; // residuals X_n - mhat_n
    Matrix mhat;
    std::vector<bool> valid;
    std::size_t valid_from = 0;
    DetrendConfig config;
    std::vector<std::string> labels;

    /// Residual rows [valid_from, N).
    Matrix valid_rows() const { return values.bottomRows(values.rows() - static_cast<Eigen::Index>(valid_from)); }
    std::vector<Date> valid_dates() const {
        return {dates.begin() + static_cast<std::ptrdiff_t>(valid_from), dates.end()};
    }
};

DemeanedPanel local_linear_demean(const PricePanel& panel, const DetrendConfig& config = {});

} // namespace elvol

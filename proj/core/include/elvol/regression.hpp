#pragma once

#include "elvol/common.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace elvol {

enum class CovarianceKind {
    Classical, // s^2 (X^T X)^{-1}, Student-t p-values
    Hac        // Newey-West with Bartlett weights, normal p-values
};

struct RegressionReport {
    std::vector<std::string> names;
    Vector coef;
    Matrix cov;
    Vector se;
    Vector t_stats;
    Vector p_values;
    double r2 = 0.0;
    std::size_t n = 0;
    std::size_t lags = 0;
    CovarianceKind kind = CovarianceKind::Hac;
    Vector residuals;

    std::size_t index_of(const std::string& name) const;
};

/// Throws elvol::Error naming the columns that are linear combinations of the others.
void require_full_rank(const Matrix& x, const std::vector<std::string>& names);

/// Sandwich (X^T X)^{-1} Omega (X^T X)^{-1} where Omega sums the lag-l
/// autocovariances of x_t u_t with weights 1 - l / (lags + 1).
Matrix newey_west_cov(const Matrix& x, const Vector& residuals, std::size_t lags);

RegressionReport ols_hac(const Vector& y, const Matrix& x, std::vector<std::string> names, std::size_t lags);
RegressionReport ols_classical(const Vector& y, const Matrix& x, std::vector<std::string> names);

struct WaldResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Chi-square(1) test of coef_i = coef_j using the report's covariance.
WaldResult wald_equality(const RegressionReport& report, std::size_t i, std::size_t j);

/// Residuals of each column of `y` after regression on [1, controls].
Matrix residualize(const Matrix& y, const Matrix& controls);

/// Two-sided normal p-value of a z statistic.
double normal_p_value(double z);

/// PS_h = alpha + b0 h + b1 e_wind + b2 e_solar on standardized predictors,
/// classical standard errors.
RegressionReport ps_uncertainty_regression(const Vector& ps_per_hour, const Vector& hours,
                                           const Vector& wind_mse, const Vector& solar_mse);

/// Coefficients with t statistics in parentheses and significance stars
/// (*** p<0.01, ** p<0.05, * p<0.1), one column per model.
std::string format_regression_table(const std::vector<RegressionReport>& models,
                                    const std::vector<std::string>& titles);

/// Long layout: model,term,coef,se,t,p plus r2 and n rows.
std::string regression_csv(const std::vector<RegressionReport>& models, const std::vector<std::string>& titles);

} // namespace elvol

#pragma once

#include "elvol/common.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace elvol {

/// Where the p-value sits relative to the tabulated range.
enum class PBound { Exact, Below, Above };

struct TestResult {
    std::string method;
    std::string null_hypothesis;
    double statistic = 0.0;
    double p_value = 1.0;
    PBound p_bound = PBound::Exact;
    std::vector<std::pair<double, double>> critical_values; // (significance level, value)
    bool reject = false;                                     // at the 5% level
    std::size_t lags = 0;
    std::size_t n = 0;

    /// "0.0147", "< 0.0001" or "> 0.10".
    std::string p_text() const;
};

enum class KpssNull { Level, Trend };

/// Bartlett bandwidth floor(4 (N / 100)^{2/9}).
std::size_t default_kpss_lags(std::size_t n);

/// KPSS stationarity test. `lags` < 0 selects default_kpss_lags.
TestResult kpss_univariate(const Vector& series, KpssNull null = KpssNull::Level, long lags = -1);

/// Nyblom-Harvey test: tr(Omega^{-1} T^{-2} sum S_t S_t^T) on the demeaned
/// panel, with Omega the Bartlett long-run covariance. The p-value comes from
/// simulated draws of sum_k chi2_d / (pi^2 k^2), computed once per dimension.
TestResult kpss_multivariate(const Matrix& panel, long lags = -1);

/// Upper-tail probability of the multivariate KPSS limit in dimension d.
double kpss_multivariate_p_value(double statistic, std::size_t dim);

enum class AdfDeterministic { None, Constant, Trend };

std::string to_string(AdfDeterministic spec);

/// Augmented Dickey-Fuller t test on the lagged level. Lag order in
/// [0, max_lags] minimizes AIC on a common sample; max_lags < 0 selects
/// floor(12 (N / 100)^{1/4}).
TestResult adf(const Vector& series, long max_lags = -1, AdfDeterministic spec = AdfDeterministic::Constant);

/// Null-distribution p-value of an ADF t statistic (left tail).
std::pair<double, PBound> adf_p_value(double t_stat, AdfDeterministic spec);

/// Dickey-Fuller t statistics on `draws` simulated random walks of length
/// `sample_size` (the input of the shipped quantile table).
std::vector<double> simulate_adf_null(AdfDeterministic spec, std::size_t sample_size, std::size_t draws,
                                      std::uint64_t seed);

/// Probability levels at which the shipped table stores quantiles.
std::vector<double> adf_table_probabilities();

} // namespace elvol

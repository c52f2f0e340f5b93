#pragma once

#include "elvol/calendar.hpp"
#include "elvol/common.hpp"
#include "elvol/semigroup.hpp"

#include <cstddef>
#include <vector>

namespace elvol {

struct RcvOptions {
    std::size_t window = 7;
    double delta = kDailyDelta;
    bool rolling = true; // slide by one day; otherwise disjoint blocks of `window`
};

/// Annualized realized covariation matrices, one per window. A window is
/// labelled by the date of its last increment.
struct RcvSeries {
    std::vector<Date> dates;
    std::vector<Matrix> mats;
    std::size_t window = 7;
    double delta = kDailyDelta;
    bool adjusted = false;
    bool rolling = true;

    std::size_t size() const { return mats.size(); }
    std::size_t dim() const { return mats.empty() ? 0 : static_cast<std::size_t>(mats.front().rows()); }
};

/// (1 / (delta w)) sum of outer products of the rows of `increments` over each
/// window. Rolling mode yields T - w + 1 windows, disjoint mode floor(T / w).
/// `dates` labels the increment rows (may be empty).
RcvSeries realized_covariation(const Matrix& increments, const std::vector<Date>& dates,
                               const RcvOptions& options = {});

/// Naive estimator on the increments X_n - X_{n-1} of `rows`; increment n is dated dates[n].
RcvSeries rcv_naive(const Matrix& rows, const std::vector<Date>& dates, const RcvOptions& options = {});

/// Plug-in estimator on the residuals eps_n = X_n - S(n) X_{n-1}.
RcvSeries rcv_adjusted(const ResidualPanel& residuals, const std::vector<Date>& residual_dates,
                       const RcvOptions& options = {});

/// Entrywise mean of the series.
Matrix long_span_average(const RcvSeries& series);

/// Q^{-1} M Q^{-1} with Q = diag(sqrt(M_ii)).
Matrix realized_correlation(const Matrix& m);

/// w^T M_j w for every window.
Vector rv_average_price(const RcvSeries& series, const Vector& weights);

struct PropagationReport {
    double ps_total = 0.0;
    Vector ps_per_hour;
    Vector propagation_level; // (1 / (delta N)) sum_n B_n^(h)^2
    Vector innovation_level;  // (1 / (delta N)) sum_n eps_n^(h)^2
    Vector total_level;       // (1 / (delta N)) sum_n (Delta_n^(h))^2
};

/// PS = sum |B_n|^2 / sum |Delta_n|^2 and its column-wise analogue per delivery period.
PropagationReport propagation_share(const ResidualPanel& residuals, double delta = kDailyDelta);

/// Smallest eigenvalue relative to the trace (0 for a zero matrix).
double min_relative_eigenvalue(const Matrix& m);

} // namespace elvol

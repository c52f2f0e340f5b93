#pragma once

#include "elvol/calendar.hpp"
#include "elvol/common.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace elvol {

struct SemigroupOptions {
    double ridge = 0.0;
    /// With ridge == 0 and cond(Gamma) > max_condition, retry with
    /// ridge = 1e-8 * trace(Gamma) / d instead of failing.
    bool auto_ridge = true;
    double max_condition = 1e12;
};

/// Effective one-step matrix S = C (Gamma + ridge I)^{-1}, where
/// C = sum X_n X_{n-1}^T / T and Gamma = sum X_{n-1} X_{n-1}^T / T over the
/// supplied rows. Both moments share the divisor, so S does not depend on it.
struct SemigroupEstimate {
    Matrix S;
    Matrix gram;         // Gamma (unregularized)
    Matrix cross_moment; // C
    std::size_t n_obs = 0; // number of (X_{n-1}, X_n) pairs
    double ridge = 0.0;
    bool auto_ridge_applied = false;
    double condition = 0.0;
    std::size_t first_row = 0; // window of rows used, [first_row, end_row)
    std::size_t end_row = 0;
};

/// Least-squares one-step predictor from rows (time x d) of a demeaned panel.
SemigroupEstimate estimate_semigroup(const Matrix& rows, const SemigroupOptions& options = {});

enum class HalfLife { Finite, Instant, Undefined };

struct Spectrum {
    std::vector<std::complex<double>> eigenvalues; // descending modulus
    HalfLife kind = HalfLife::Undefined;
    double half_life_days = 0.0; // -ln 2 / ln |lambda_1| when kind == Finite
};

Spectrum spectrum(const Matrix& S);

/// Backward-looking refit schedule. Refits happen at rows burn_in,
/// burn_in + refit_every, ...; each uses every strictly earlier row. Row n >= burn_in
/// uses the latest refit at or before n.
struct SemigroupSchedule {
    std::vector<SemigroupEstimate> estimates;
    std::vector<std::size_t> refit_rows;
    std::size_t first_row = 0;

    const SemigroupEstimate& estimate_for(std::size_t row) const;

    /// A single estimate applied from `first_row` on (full-sample use).
    static SemigroupSchedule constant(SemigroupEstimate estimate, std::size_t first_row = 1);
};

SemigroupSchedule rolling_semigroup(const Matrix& rows, std::size_t refit_every_days = 28,
                                    std::size_t burn_in_days = 364, const SemigroupOptions& options = {});

/// Plug-in residuals eps_n = X_n - S(n) X_{n-1} and propagation components
/// B_n = (S(n) - I) X_{n-1}, for rows n >= max(1, schedule.first_row).
struct ResidualPanel {
    Matrix eps;
    Matrix bhat;
    Matrix diffs;                 // X_n - X_{n-1}
    std::vector<std::size_t> row; // index n in the input rows
    std::size_t skipped = 0;      // rows before the schedule starts
};

ResidualPanel propagation_residuals(const Matrix& rows, const SemigroupSchedule& schedule);

/// Dates aligned with a residual panel built from rows whose dates are `row_dates`.
std::vector<Date> residual_dates(const ResidualPanel& residuals, const std::vector<Date>& row_dates);

} // namespace elvol

#include "elvol/semigroup.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace elvol {

SemigroupEstimate estimate_semigroup(const Matrix& rows, const SemigroupOptions& options) {
    const Eigen::Index t = rows.rows();
    const Eigen::Index d = rows.cols();
    if (t < d + 1 || t < 2) {
        throw Error(fmt::format("semigroup estimation needs at least d+1 = {} rows, got {}", d + 1, t));
    }
    if (options.ridge < 0.0) {
        throw Error("ridge must be nonnegative");
    }
    const auto lagged = rows.topRows(t - 1);
    const auto lead = rows.bottomRows(t - 1);
    const double scale = 1.0 / static_cast<double>(t - 1);

    SemigroupEstimate est;
    est.n_obs = static_cast<std::size_t>(t - 1);
    est.end_row = static_cast<std::size_t>(t);
    est.gram = scale * (lagged.transpose() * lagged);
    est.gram = 0.5 * (est.gram + est.gram.transpose()).eval();
    est.cross_moment = scale * (lead.transpose() * lagged);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(est.gram, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    est.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();

    double ridge = options.ridge;
    if (ridge == 0.0 && !(est.condition <= options.max_condition)) {
        const double trace = est.gram.trace();
        if (!options.auto_ridge || !(trace > 0.0)) {
            throw Error(fmt::format("Gamma is numerically singular (condition {:.3g}); pass a positive ridge",
                                    est.condition));
        }
        ridge = 1e-8 * trace / static_cast<double>(d);
        est.auto_ridge_applied = true;
    }
    est.ridge = ridge;
    const Matrix regularized = est.gram + ridge * Matrix::Identity(d, d);
    // S G = C  <=>  G S^T = C^T  (G symmetric)
    Eigen::LDLT<Matrix> ldlt(regularized);
    if (ldlt.info() != Eigen::Success || ldlt.isNegative()) {
        throw Error("Gamma + ridge*I is not positive definite; increase the ridge");
    }
    est.S = ldlt.solve(est.cross_moment.transpose()).transpose();
    if (!est.S.allFinite()) {
        throw Error("semigroup estimate is not finite; increase the ridge");
    }
    return est;
}

Spectrum spectrum(const Matrix& S) {
    Spectrum out;
    if (!S.allFinite()) {
        return out;
    }
    Eigen::EigenSolver<Matrix> solver(S, false);
    const auto& ev = solver.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::stable_sort(out.eigenvalues.begin(), out.eigenvalues.end(),
                     [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
    const double lead = out.eigenvalues.empty() ? 0.0 : std::abs(out.eigenvalues.front());
    if (lead == 0.0) {
        out.kind = HalfLife::Instant;
        out.half_life_days = 0.0;
    } else if (lead < 1.0) {
        out.kind = HalfLife::Finite;
        out.half_life_days = -std::log(2.0) / std::log(lead);
    } else {
        out.kind = HalfLife::Undefined;
    }
    return out;
}

const SemigroupEstimate& SemigroupSchedule::estimate_for(std::size_t row) const {
    if (estimates.empty() || row < first_row) {
        throw Error(fmt::format("row {} precedes the semigroup schedule (starts at {})", row, first_row));
    }
    if (refit_rows.empty()) {
        return estimates.front();
    }
    const auto it = std::upper_bound(refit_rows.begin(), refit_rows.end(), row);
    return estimates[static_cast<std::size_t>(it - refit_rows.begin()) - 1];
}

SemigroupSchedule SemigroupSchedule::constant(SemigroupEstimate estimate, std::size_t first_row) {
    SemigroupSchedule s;
    s.estimates.push_back(std::move(estimate));
    s.first_row = std::max<std::size_t>(first_row, 1);
    return s;
}

SemigroupSchedule rolling_semigroup(const Matrix& rows, std::size_t refit_every_days, std::size_t burn_in_days,
                                    const SemigroupOptions& options) {
    const auto t = static_cast<std::size_t>(rows.rows());
    if (refit_every_days == 0) {
        throw Error("refit interval must be at least one day");
    }
    if (burn_in_days >= t) {
        throw Error(fmt::format("burn-in of {} days exceeds the {}-row panel", burn_in_days, t));
    }
    SemigroupSchedule s;
    s.first_row = std::max<std::size_t>(burn_in_days, 1);
    for (std::size_t r = s.first_row; r < t; r += refit_every_days) {
        auto est = estimate_semigroup(rows.topRows(static_cast<Eigen::Index>(r)), options);
        est.first_row = 0;
        est.end_row = r;
        s.estimates.push_back(std::move(est));
        s.refit_rows.push_back(r);
    }
    return s;
}

ResidualPanel propagation_residuals(const Matrix& rows, const SemigroupSchedule& schedule) {
    const Eigen::Index t = rows.rows();
    const Eigen::Index d = rows.cols();
    const auto start = static_cast<Eigen::Index>(std::max<std::size_t>(schedule.first_row, 1));
    ResidualPanel out;
    out.skipped = static_cast<std::size_t>(std::min(start, t));
    const Eigen::Index count = std::max<Eigen::Index>(t - start, 0);
    out.eps.resize(count, d);
    out.bhat.resize(count, d);
    out.diffs.resize(count, d);
    for (Eigen::Index n = start; n < t; ++n) {
        const auto& S = schedule.estimate_for(static_cast<std::size_t>(n)).S;
        if (S.rows() != d) {
            throw Error("semigroup dimension does not match the panel");
        }
        const Eigen::Index r = n - start;
        out.diffs.row(r) = rows.row(n) - rows.row(n - 1);
        out.eps.row(r) = rows.row(n) - (S * rows.row(n - 1).transpose()).transpose();
        out.bhat.row(r) = out.diffs.row(r) - out.eps.row(r);
        out.row.push_back(static_cast<std::size_t>(n));
    }
    return out;
}

std::vector<Date> residual_dates(const ResidualPanel& residuals, const std::vector<Date>& row_dates) {
    std::vector<Date> out;
    out.reserve(residuals.row.size());
    for (auto r : residuals.row) {
        out.push_back(row_dates.at(r));
    }
    return out;
}

} // namespace elvol

#include "elvol/rcv.hpp"

#include <fmt/format.h>

#include <cmath>

namespace elvol {

RcvSeries realized_covariation(const Matrix& increments, const std::vector<Date>& dates,
                               const RcvOptions& options) {
    if (options.window < 1) {
        throw Error("RCV window must be at least one day");
    }
    if (!(options.delta > 0.0)) {
        throw Error("delta must be positive");
    }
    const auto t = static_cast<std::size_t>(increments.rows());
    const auto w = options.window;
    if (!dates.empty() && dates.size() != t) {
        throw Error("RCV dates do not match the increment rows");
    }
    if (t < w) {
        throw Error(fmt::format("RCV needs at least {} increments, got {}", w, t));
    }
    RcvSeries out;
    out.window = w;
    out.delta = options.delta;
    out.rolling = options.rolling;
    const double scale = 1.0 / (options.delta * static_cast<double>(w));
    const std::size_t step = options.rolling ? 1 : w;
    for (std::size_t end = w; end <= t; end += step) {
        const auto block = increments.middleRows(static_cast<Eigen::Index>(end - w), static_cast<Eigen::Index>(w));
        Matrix m = block.transpose() * block;
        m = (0.5 * scale) * (m + m.transpose()).eval();
        out.mats.push_back(std::move(m));
        if (!dates.empty()) {
            out.dates.push_back(dates[end - 1]);
        }
    }
    return out;
}

RcvSeries rcv_naive(const Matrix& rows, const std::vector<Date>& dates, const RcvOptions& options) {
    if (rows.rows() < 2) {
        throw Error("RCV needs at least two rows");
    }
    const Eigen::Index t = rows.rows();
    const Matrix diffs = rows.bottomRows(t - 1) - rows.topRows(t - 1);
    std::vector<Date> diff_dates;
    if (!dates.empty()) {
        diff_dates.assign(dates.begin() + 1, dates.end());
    }
    auto out = realized_covariation(diffs, diff_dates, options);
    out.adjusted = false;
    return out;
}

RcvSeries rcv_adjusted(const ResidualPanel& residuals, const std::vector<Date>& residual_dates,
                       const RcvOptions& options) {
    auto out = realized_covariation(residuals.eps, residual_dates, options);
    out.adjusted = true;
    return out;
}

Matrix long_span_average(const RcvSeries& series) {
    if (series.mats.empty()) {
        throw Error("long-span average of an empty RCV series");
    }
    Matrix sum = Matrix::Zero(series.mats.front().rows(), series.mats.front().cols());
    for (const auto& m : series.mats) {
        sum += m;
    }
    return sum / static_cast<double>(series.mats.size());
}

Matrix realized_correlation(const Matrix& m) {
    const Eigen::Index d = m.rows();
    Vector inv_sd(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(m(i, i) > 0.0)) {
            throw Error(fmt::format("realized correlation undefined: diagonal entry {} (hour {}) is not positive",
                                    m(i, i), i + 1));
        }
        inv_sd(i) = 1.0 / std::sqrt(m(i, i));
    }
    Matrix rho = inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
    rho = (0.5 * (rho + rho.transpose())).eval();
    rho.diagonal().setOnes();
    return rho;
}

Vector rv_average_price(const RcvSeries& series, const Vector& weights) {
    if (static_cast<std::size_t>(weights.size()) != series.dim()) {
        throw Error("average-price weights do not match the RCV dimension");
    }
    Vector out(static_cast<Eigen::Index>(series.size()));
    for (std::size_t j = 0; j < series.size(); ++j) {
        out(static_cast<Eigen::Index>(j)) = weights.dot(series.mats[j] * weights);
    }
    return out;
}

PropagationReport propagation_share(const ResidualPanel& residuals, double delta) {
    const double total = residuals.diffs.squaredNorm();
    if (!(total > 0.0)) {
        throw Error("propagation share undefined: increments have zero total variation");
    }
    PropagationReport r;
    const Vector prop = residuals.bhat.colwise().squaredNorm().transpose();
    const Vector innov = residuals.eps.colwise().squaredNorm().transpose();
    const Vector tot = residuals.diffs.colwise().squaredNorm().transpose();
    r.ps_total = residuals.bhat.squaredNorm() / total;
    r.ps_per_hour.resize(tot.size());
    for (Eigen::Index h = 0; h < tot.size(); ++h) {
        if (!(tot(h) > 0.0)) {
            throw Error(fmt::format("propagation share undefined: delivery period {} has zero variation", h + 1));
        }
        r.ps_per_hour(h) = prop(h) / tot(h);
    }
    const double scale = 1.0 / (delta * static_cast<double>(residuals.diffs.rows()));
    r.propagation_level = scale * prop;
    r.innovation_level = scale * innov;
    r.total_level = scale * tot;
    return r;
}

double min_relative_eigenvalue(const Matrix& m) {
    const double trace = m.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    if (trace == 0.0) {
        return lmin == 0.0 ? 0.0 : lmin / std::abs(lmin);
    }
    return lmin / std::abs(trace);
}

} // namespace elvol

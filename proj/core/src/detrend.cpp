#include "elvol/detrend.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace elvol {

double epanechnikov(double u) {
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

DemeanedPanel local_linear_demean(const PricePanel& panel, const DetrendConfig& config) {
    if (!(config.bandwidth_days > 0.0)) {
        throw Error(fmt::format("bandwidth must be positive, got {}", config.bandwidth_days));
    }
    const auto n_rows = static_cast<Eigen::Index>(panel.rows());
    const auto d = static_cast<Eigen::Index>(panel.bins());
    const Eigen::Index p = config.dow_dummies ? 8 : 2;

    // positive-weight lags j = n - k
    std::vector<double> lag_weight;
    for (long j = 1;; ++j) {
        const double w = epanechnikov(static_cast<double>(j) / config.bandwidth_days);
        if (w <= 0.0) {
            break;
        }
        lag_weight.push_back(w);
    }
    const auto window = static_cast<Eigen::Index>(lag_weight.size());

    DemeanedPanel out;
    out.dates = panel.dates();
    out.config = config;
    out.labels = panel.partition().labels();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.values = Matrix::Constant(n_rows, d, nan);
    out.mhat = Matrix::Constant(n_rows, d, nan);
    out.valid.assign(panel.rows(), false);

    const auto& X = panel.values();
    std::vector<int> dow(panel.rows());
    for (std::size_t i = 0; i < panel.rows(); ++i) {
        dow[i] = weekday_index(panel.dates()[i]);
    }

    Matrix design(window, p);
    Matrix gram(p, p);
    Matrix rhs(p, d);
    for (Eigen::Index n = window; n < n_rows; ++n) {
        if (window < p) {
            break;
        }
        design.setZero();
        for (Eigen::Index j = 1; j <= window; ++j) {
            const Eigen::Index k = n - j;
            const Eigen::Index r = j - 1;
            design(r, 0) = 1.0;
            design(r, 1) = -static_cast<double>(j);
            if (config.dow_dummies && dow[static_cast<std::size_t>(k)] > 0) {
                design(r, 1 + dow[static_cast<std::size_t>(k)]) = 1.0;
            }
        }
        const Eigen::Map<const Vector> w(lag_weight.data(), window);
        gram.noalias() = design.transpose() * w.asDiagonal() * design;
        rhs.noalias() = design.transpose() * w.asDiagonal() * X.middleRows(n - window, window).colwise().reverse();
        Eigen::ColPivHouseholderQR<Matrix> qr(gram);
        if (qr.rank() < p) {
            continue;
        }
        const Matrix coef = qr.solve(rhs);
        Eigen::RowVectorXd fitted = coef.row(0);
        if (config.dow_dummies && dow[static_cast<std::size_t>(n)] > 0) {
            fitted += coef.row(1 + dow[static_cast<std::size_t>(n)]);
        }
        out.mhat.row(n) = fitted;
        out.values.row(n) = X.row(n) - fitted;
        out.valid[static_cast<std::size_t>(n)] = true;
    }

    // the downstream block is the contiguous valid tail
    std::size_t from = panel.rows();
    while (from > 0 && out.valid[from - 1]) {
        --from;
    }
    for (std::size_t i = 0; i < from; ++i) {
        out.valid[i] = false;
        out.values.row(static_cast<Eigen::Index>(i)).setConstant(nan);
        out.mhat.row(static_cast<Eigen::Index>(i)).setConstant(nan);
    }
    if (from == panel.rows()) {
        throw Error(fmt::format("no row has a full {}-lag kernel window with {} regressors ({} rows)", window, p,
                                panel.rows()));
    }
    out.valid_from = from;
    return out;
}

} // namespace elvol

#include "elvol/leverage.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace elvol {

namespace {

constexpr double kBand = 1.96;

void require_variation(const Vector& x, const char* what) {
    if (x.size() == 0 || (x.array() == x(0)).all()) {
        throw Error(fmt::format("{} has zero variance", what));
    }
}

Matrix piecewise_design(const Vector& x, const Matrix& controls) {
    Matrix design(x.size(), 3 + controls.cols());
    design.col(0).setOnes();
    design.col(1) = x.cwiseMax(0.0);
    design.col(2) = x.cwiseMin(0.0);
    if (controls.cols() > 0) {
        design.rightCols(controls.cols()) = controls;
    }
    return design;
}

std::vector<std::string> piecewise_names(Eigen::Index controls) {
    std::vector<std::string> names{"const", "beta_plus", "beta_minus"};
    for (Eigen::Index k = 0; k < controls; ++k) {
        names.push_back(fmt::format("control{}", k + 1));
    }
    return names;
}

} // namespace

Matrix nic_controls(NicSpec spec, const Vector& asinh_lagged_price, const Vector& log_lagged_score) {
    switch (spec) {
    case NicSpec::NoControls:
        return Matrix(asinh_lagged_price.size(), 0);
    case NicSpec::PriceLevel:
        return asinh_lagged_price;
    case NicSpec::MeanReversion:
        return log_lagged_score;
    case NicSpec::Joint: {
        if (asinh_lagged_price.size() != log_lagged_score.size()) {
            throw Error("control series differ in length");
        }
        Matrix c(asinh_lagged_price.size(), 2);
        c.col(0) = asinh_lagged_price;
        c.col(1) = log_lagged_score;
        return c;
    }
    }
    throw Error("unknown control specification");
}

std::vector<std::size_t> equal_frequency_bins(const Vector& x, std::size_t bins) {
    const auto n = static_cast<std::size_t>(x.size());
    if (bins == 0 || n < bins) {
        throw Error(fmt::format("cannot split {} observations into {} bins", n, bins));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a)) < x(static_cast<Eigen::Index>(b));
    });
    std::vector<std::size_t> bin(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        bin[order[rank]] = rank * bins / n;
    }
    return bin;
}

NicCurve binned_nic(const Vector& response, const Vector& driver, const Matrix& controls, NicSpec spec,
                    std::size_t bins, std::size_t hac_lags) {
    const Eigen::Index n = response.size();
    if (driver.size() != n) {
        throw Error("response and driver differ in length");
    }
    if (static_cast<std::size_t>(n) < 20 * bins) {
        throw Error(fmt::format("news-impact curve needs at least {} observations, got {}", 20 * bins, n));
    }
    require_variation(driver, "news-impact driver");
    Vector y = response;
    Vector x = driver;
    if (controls.cols() > 0) {
        Matrix both(n, 2);
        both.col(0) = response;
        both.col(1) = driver;
        const Matrix r = residualize(both, controls);
        y = r.col(0);
        x = r.col(1);
        require_variation(x, "residualized news-impact driver");
    }

    NicCurve c;
    c.spec = spec;
    const auto bin = equal_frequency_bins(x, bins);
    const auto b = static_cast<Eigen::Index>(bins);
    Matrix dummies = Matrix::Zero(n, b);
    c.edges = Vector::Constant(b + 1, std::numeric_limits<double>::infinity());
    c.centers = Vector::Zero(b);
    c.counts = Vector::Zero(b);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(bin[static_cast<std::size_t>(i)]);
        dummies(i, k) = 1.0;
        c.edges(k) = std::min(c.edges(k), x(i));
        c.centers(k) += x(i);
        c.counts(k) += 1.0;
    }
    c.edges(b) = x.maxCoeff();
    c.centers = c.centers.cwiseQuotient(c.counts);

    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < b; ++k) {
        names.push_back(fmt::format("bin{:02}", k + 1));
    }
    c.bin_regression = ols_hac(y, dummies, std::move(names), hac_lags);
    c.mu = c.bin_regression.coef;
    c.se = c.bin_regression.se;
    c.lo = c.mu - kBand * c.se;
    c.hi = c.mu + kBand * c.se;

    c.piecewise = ols_hac(y, piecewise_design(x, Matrix(n, 0)), piecewise_names(0), hac_lags);
    c.wald = wald_equality(c.piecewise, 1, 2);
    return c;
}

LeverageCurves functional_leverage_curves(const Matrix& iv, const Vector& driver, const std::vector<Matrix>& controls,
                                          std::size_t hac_lags) {
    const Eigen::Index n = iv.rows();
    const Eigen::Index d = iv.cols();
    if (driver.size() != n) {
        throw Error("integrated-variance series and driver differ in length");
    }
    if (!controls.empty() && static_cast<Eigen::Index>(controls.size()) != d) {
        throw Error(fmt::format("expected {} per-period control matrices, got {}", d, controls.size()));
    }
    require_variation(driver, "leverage driver");
    LeverageCurves out;
    out.conditional = !controls.empty();
    out.beta_plus.resize(d);
    out.beta_minus.resize(d);
    out.se_plus.resize(d);
    out.se_minus.resize(d);
    out.wald_p.resize(d);
    out.asymmetric.resize(static_cast<std::size_t>(d));
    for (Eigen::Index h = 0; h < d; ++h) {
        const Matrix ctrl = controls.empty() ? Matrix(n, 0) : controls[static_cast<std::size_t>(h)];
        if (ctrl.rows() != n) {
            throw Error(fmt::format("controls of period {} have {} rows, expected {}", h + 1, ctrl.rows(), n));
        }
        const auto rep = ols_hac(iv.col(h), piecewise_design(driver, ctrl), piecewise_names(ctrl.cols()), hac_lags);
        out.beta_plus(h) = rep.coef(1);
        out.beta_minus(h) = rep.coef(2);
        out.se_plus(h) = rep.se(1);
        out.se_minus(h) = rep.se(2);
        out.wald_p(h) = wald_equality(rep, 1, 2).p_value;
        out.asymmetric[static_cast<std::size_t>(h)] = out.wald_p(h) < 0.05;
    }
    return out;
}

} // namespace elvol

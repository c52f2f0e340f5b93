#include "elvol/regression.hpp"

#include "elvol/panel_io.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace elvol {

namespace {

std::vector<std::string> default_names(std::vector<std::string> names, Eigen::Index p) {
    if (names.empty()) {
        for (Eigen::Index k = 0; k < p; ++k) {
            names.push_back(fmt::format("x{}", k));
        }
    }
    if (static_cast<Eigen::Index>(names.size()) != p) {
        throw Error(fmt::format("{} names for {} regressors", names.size(), p));
    }
    return names;
}

bool has_constant_column(const Matrix& x) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (x.rows() > 0 && x(0, k) != 0.0 && (x.col(k).array() == x(0, k)).all()) {
            return true;
        }
    }
    return false;
}

struct Fit {
    Vector coef;
    Vector residuals;
    Matrix xtx_inv;
};

Fit fit(const Vector& y, const Matrix& x, const std::vector<std::string>& names) {
    if (y.size() != x.rows()) {
        throw Error("response and regressors have different lengths");
    }
    if (x.rows() <= x.cols()) {
        throw Error(fmt::format("regression needs more than {} observations, got {}", x.cols(), x.rows()));
    }
    if (!y.allFinite() || !x.allFinite()) {
        throw Error("regression input contains non-finite values");
    }
    require_full_rank(x, names);
    Fit f;
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    f.coef = qr.solve(y);
    f.residuals = y - x * f.coef;
    const Matrix xtx = x.transpose() * x;
    f.xtx_inv = xtx.ldlt().solve(Matrix::Identity(x.cols(), x.cols()));
    f.xtx_inv = (0.5 * (f.xtx_inv + f.xtx_inv.transpose())).eval();
    return f;
}

double r_squared(const Vector& y, const Vector& resid, bool centered) {
    const double ssr = resid.squaredNorm();
    const double sst = centered ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
    if (!(sst > 0.0)) {
        return ssr == 0.0 ? 1.0 : 0.0;
    }
    return std::clamp(1.0 - ssr / sst, centered ? 0.0 : -HUGE_VAL, 1.0);
}

void finish(RegressionReport& r) {
    const Eigen::Index p = r.coef.size();
    r.se = r.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    r.t_stats.resize(p);
    r.p_values.resize(p);
    const double dof = static_cast<double>(r.n) - static_cast<double>(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        r.t_stats(k) = r.coef(k) / r.se(k);
        const double t = r.t_stats(k);
        if (std::isnan(t)) {
            r.p_values(k) = std::numeric_limits<double>::quiet_NaN();
        } else if (std::isinf(t)) {
            r.p_values(k) = 0.0;
        } else if (r.kind == CovarianceKind::Hac) {
            r.p_values(k) = normal_p_value(t);
        } else {
            boost::math::students_t dist(dof);
            r.p_values(k) = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
        }
    }
}

std::string stars(double p) {
    if (p < 0.01) {
        return "***";
    }
    if (p < 0.05) {
        return "**";
    }
    if (p < 0.1) {
        return "*";
    }
    return "";
}

} // namespace

std::size_t RegressionReport::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw Error(fmt::format("no regressor named '{}'", name));
    }
    return static_cast<std::size_t>(it - names.begin());
}

void require_full_rank(const Matrix& x, const std::vector<std::string>& names) {
    const Eigen::Index p = x.cols();
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() == p) {
        return;
    }
    // columns with weight in the null space are the ones involved in a dependency
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullV);
    const Eigen::Index null_dim = p - qr.rank();
    const Matrix null = svd.matrixV().rightCols(null_dim);
    std::string which;
    for (Eigen::Index col = 0; col < p; ++col) {
        if (null.row(col).norm() <= 1e-8) {
            continue;
        }
        const auto& label = static_cast<Eigen::Index>(names.size()) == p ? names[static_cast<std::size_t>(col)]
                                                                        : fmt::format("x{}", col);
        which += (which.empty() ? "" : ", ") + fmt::format("'{}'", label);
    }
    throw Error(fmt::format("regressors are rank deficient (rank {} of {}): {} are linearly dependent", qr.rank(), p,
                            which));
}

Matrix newey_west_cov(const Matrix& x, const Vector& residuals, std::size_t lags) {
    if (x.rows() != residuals.size()) {
        throw Error("regressors and residuals have different lengths");
    }
    const Eigen::Index t = x.rows();
    const Matrix scores = x.array().colwise() * residuals.array();
    Matrix omega = scores.transpose() * scores;
    const auto max_lag = std::min<Eigen::Index>(static_cast<Eigen::Index>(lags), t - 1);
    for (Eigen::Index l = 1; l <= max_lag; ++l) {
        const double w = 1.0 - static_cast<double>(l) / (static_cast<double>(lags) + 1.0);
        const Matrix gamma = scores.bottomRows(t - l).transpose() * scores.topRows(t - l);
        omega += w * (gamma + gamma.transpose());
    }
    const Matrix xtx = x.transpose() * x;
    const Eigen::LDLT<Matrix> ldlt(xtx);
    const Matrix bread = ldlt.solve(Matrix::Identity(x.cols(), x.cols()));
    Matrix cov = bread * omega * bread;
    return 0.5 * (cov + cov.transpose());
}

RegressionReport ols_hac(const Vector& y, const Matrix& x, std::vector<std::string> names, std::size_t lags) {
    RegressionReport r;
    r.names = default_names(std::move(names), x.cols());
    const auto f = fit(y, x, r.names);
    r.coef = f.coef;
    r.residuals = f.residuals;
    r.n = static_cast<std::size_t>(y.size());
    r.lags = lags;
    r.kind = CovarianceKind::Hac;
    r.cov = newey_west_cov(x, f.residuals, lags);
    r.r2 = r_squared(y, f.residuals, has_constant_column(x));
    finish(r);
    return r;
}

RegressionReport ols_classical(const Vector& y, const Matrix& x, std::vector<std::string> names) {
    RegressionReport r;
    r.names = default_names(std::move(names), x.cols());
    const auto f = fit(y, x, r.names);
    r.coef = f.coef;
    r.residuals = f.residuals;
    r.n = static_cast<std::size_t>(y.size());
    r.kind = CovarianceKind::Classical;
    const double s2 = f.residuals.squaredNorm() / static_cast<double>(x.rows() - x.cols());
    r.cov = s2 * f.xtx_inv;
    r.r2 = r_squared(y, f.residuals, has_constant_column(x));
    finish(r);
    return r;
}

WaldResult wald_equality(const RegressionReport& report, std::size_t i, std::size_t j) {
    const auto p = static_cast<std::size_t>(report.coef.size());
    if (i >= p || j >= p || i == j) {
        throw Error(fmt::format("invalid coefficient indices {} and {}", i, j));
    }
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    const double diff = report.coef(a) - report.coef(b);
    const double var = report.cov(a, a) + report.cov(b, b) - 2.0 * report.cov(a, b);
    WaldResult w;
    if (!(var > 0.0)) {
        w.statistic = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        w.p_value = diff == 0.0 ? 1.0 : 0.0;
        return w;
    }
    w.statistic = diff * diff / var;
    boost::math::chi_squared dist(1.0);
    w.p_value = boost::math::cdf(boost::math::complement(dist, w.statistic));
    return w;
}

Matrix residualize(const Matrix& y, const Matrix& controls) {
    if (controls.cols() == 0) {
        return y;
    }
    if (controls.rows() != y.rows()) {
        throw Error("controls and response have different lengths");
    }
    Matrix design(y.rows(), controls.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(controls.cols()) = controls;
    std::vector<std::string> names{"const"};
    for (Eigen::Index k = 0; k < controls.cols(); ++k) {
        names.push_back(fmt::format("control{}", k + 1));
    }
    require_full_rank(design, names);
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    return y - design * qr.solve(y);
}

double normal_p_value(double z) {
    boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

RegressionReport ps_uncertainty_regression(const Vector& ps_per_hour, const Vector& hours, const Vector& wind_mse,
                                           const Vector& solar_mse) {
    const Eigen::Index n = ps_per_hour.size();
    if (hours.size() != n || wind_mse.size() != n || solar_mse.size() != n) {
        throw Error("propagation-share regression inputs differ in length");
    }
    auto standardize = [](const Vector& v, const char* name) {
        const double mean = v.mean();
        const double sd = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
        if (!(sd > 0.0)) {
            throw Error(fmt::format("predictor '{}' has zero variance", name));
        }
        return Vector((v.array() - mean) / sd);
    };
    Matrix x(n, 4);
    x.col(0).setOnes();
    x.col(1) = standardize(hours, "hour");
    x.col(2) = standardize(wind_mse, "wind");
    x.col(3) = standardize(solar_mse, "solar");
    return ols_classical(ps_per_hour, x, {"alpha", "hour", "wind", "solar"});
}

std::string format_regression_table(const std::vector<RegressionReport>& models,
                                    const std::vector<std::string>& titles) {
    std::vector<std::string> terms;
    for (const auto& m : models) {
        for (const auto& n : m.names) {
            if (std::find(terms.begin(), terms.end(), n) == terms.end()) {
                terms.push_back(n);
            }
        }
    }
    constexpr int kLabel = 14;
    constexpr int kCol = 18;
    std::string out = fmt::format("{:<{}}", "", kLabel);
    for (std::size_t k = 0; k < models.size(); ++k) {
        out += fmt::format("{:>{}}", k < titles.size() ? titles[k] : fmt::format("({})", k + 1), kCol);
    }
    out += '\n';
    for (const auto& term : terms) {
        std::string coef_line = fmt::format("{:<{}}", term, kLabel);
        std::string t_line = fmt::format("{:<{}}", "", kLabel);
        for (const auto& m : models) {
            const auto it = std::find(m.names.begin(), m.names.end(), term);
            if (it == m.names.end()) {
                coef_line += fmt::format("{:>{}}", "", kCol);
                t_line += fmt::format("{:>{}}", "", kCol);
                continue;
            }
            const auto k = static_cast<Eigen::Index>(it - m.names.begin());
            coef_line += fmt::format("{:>{}}", fmt::format("{:.3f}{}", m.coef(k), stars(m.p_values(k))), kCol);
            t_line += fmt::format("{:>{}}", fmt::format("({:.2f})", m.t_stats(k)), kCol);
        }
        out += coef_line + '\n' + t_line + '\n';
    }
    std::string r2_line = fmt::format("{:<{}}", "R2", kLabel);
    std::string n_line = fmt::format("{:<{}}", "N", kLabel);
    for (const auto& m : models) {
        r2_line += fmt::format("{:>{}.3f}", m.r2, kCol);
        n_line += fmt::format("{:>{}}", m.n, kCol);
    }
    out += r2_line + '\n' + n_line + '\n';
    out += "Significance: *** p<0.01, ** p<0.05, * p<0.1\n";
    return out;
}

std::string regression_csv(const std::vector<RegressionReport>& models, const std::vector<std::string>& titles) {
    std::string out = "model,term,coef,se,t,p\n";
    for (std::size_t k = 0; k < models.size(); ++k) {
        const auto& m = models[k];
        const std::string title = k < titles.size() ? titles[k] : fmt::format("model{}", k + 1);
        for (std::size_t i = 0; i < m.names.size(); ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            out += fmt::format("{},{},{},{},{},{}\n", title, m.names[i], format_number(m.coef(e)),
                               format_number(m.se(e)), format_number(m.t_stats(e)), format_number(m.p_values(e)));
        }
        out += fmt::format("{},r2,{},,,\n", title, format_number(m.r2));
        out += fmt::format("{},n,{},,,\n", title, m.n);
    }
    return out;
}

} // namespace elvol

#include "elvol/stationarity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

namespace elvol {

namespace detail {
extern const char* const kAdfQuantileTable;
} // namespace detail

namespace {

constexpr std::array<double, 4> kKpssLevels{0.10, 0.05, 0.025, 0.01};
constexpr std::array<double, 4> kKpssLevelCrit{0.347, 0.463, 0.574, 0.739};
constexpr std::array<double, 4> kKpssTrendCrit{0.119, 0.146, 0.176, 0.216};

constexpr std::size_t kKpssNullDraws = 100000;
constexpr std::size_t kKpssSeriesTerms = 200;

Matrix bartlett_long_run(const Matrix& e, std::size_t lags) {
    const Eigen::Index t = e.rows();
    Matrix omega = e.transpose() * e / static_cast<double>(t);
    const auto max_lag = std::min<Eigen::Index>(static_cast<Eigen::Index>(lags), t - 1);
    for (Eigen::Index l = 1; l <= max_lag; ++l) {
        const double w = 1.0 - static_cast<double>(l) / (static_cast<double>(lags) + 1.0);
        const Matrix g = e.bottomRows(t - l).transpose() * e.topRows(t - l) / static_cast<double>(t);
        omega += w * (g + g.transpose());
    }
    return 0.5 * (omega + omega.transpose());
}

Matrix partial_sum_moment(const Matrix& e) {
    const Eigen::Index t = e.rows();
    Vector s = Vector::Zero(e.cols());
    Matrix c = Matrix::Zero(e.cols(), e.cols());
    for (Eigen::Index i = 0; i < t; ++i) {
        s += e.row(i).transpose();
        c.noalias() += s * s.transpose();
    }
    return c / (static_cast<double>(t) * static_cast<double>(t));
}

std::size_t resolve_lags(long lags, std::size_t n) {
    return lags < 0 ? default_kpss_lags(n) : static_cast<std::size_t>(lags);
}

struct AdfTable {
    std::map<AdfDeterministic, std::pair<std::vector<double>, std::vector<double>>> rows; // probs, quantiles
};

AdfDeterministic parse_spec(const std::string& s) {
    if (s == "n" || s == "none") {
        return AdfDeterministic::None;
    }
    if (s == "c" || s == "constant") {
        return AdfDeterministic::Constant;
    }
    if (s == "ct" || s == "trend") {
        return AdfDeterministic::Trend;
    }
    throw Error(fmt::format("unknown ADF specification '{}'", s));
}

const AdfTable& adf_table() {
    static const AdfTable table = [] {
        AdfTable t;
        std::istringstream in(detail::kAdfQuantileTable);
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            if (header) {
                header = false;
                continue;
            }
            std::istringstream fields(line);
            std::string spec;
            std::string prob;
            std::string quant;
            std::getline(fields, spec, ',');
            std::getline(fields, prob, ',');
            std::getline(fields, quant, ',');
            auto& row = t.rows[parse_spec(spec)];
            row.first.push_back(std::stod(prob));
            row.second.push_back(std::stod(quant));
        }
        return t;
    }();
    return table;
}

std::size_t deterministic_columns(AdfDeterministic spec) {
    switch (spec) {
    case AdfDeterministic::None:
        return 0;
    case AdfDeterministic::Constant:
        return 1;
    case AdfDeterministic::Trend:
        return 2;
    }
    return 0;
}

} // namespace

std::string TestResult::p_text() const {
    if (p_bound == PBound::Below || p_value < 1e-4) {
        return p_value < 1e-4 ? "< 0.0001" : fmt::format("< {:.4g}", p_value);
    }
    if (p_bound == PBound::Above) {
        return fmt::format("> {:.4g}", p_value);
    }
    return fmt::format("{:.4f}", p_value);
}

std::size_t default_kpss_lags(std::size_t n) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

TestResult kpss_univariate(const Vector& series, KpssNull null, long lags) {
    const Eigen::Index n = series.size();
    if (n <= 10) {
        throw Error(fmt::format("KPSS needs more than 10 observations, got {}", n));
    }
    Matrix design(n, null == KpssNull::Level ? 1 : 2);
    design.col(0).setOnes();
    if (null == KpssNull::Trend) {
        design.col(1) = Vector::LinSpaced(n, 1.0, static_cast<double>(n));
    }
    const Vector coef = design.colPivHouseholderQr().solve(series);
    const Matrix e = series - design * coef;

    TestResult r;
    r.method = null == KpssNull::Level ? "KPSS (level)" : "KPSS (trend)";
    r.null_hypothesis = null == KpssNull::Level ? "level stationary" : "trend stationary";
    r.n = static_cast<std::size_t>(n);
    r.lags = resolve_lags(lags, r.n);
    const double scale = series.cwiseAbs().maxCoeff();
    const double lrv = bartlett_long_run(e, r.lags)(0, 0);
    if (!(lrv > 1e-24 * std::max(scale * scale, 1e-300)) || e.cwiseAbs().maxCoeff() <= 1e-14 * scale) {
        throw Error("KPSS long-run variance is degenerate (constant series)");
    }
    r.statistic = partial_sum_moment(e)(0, 0) / lrv;

    const auto& crit = null == KpssNull::Level ? kKpssLevelCrit : kKpssTrendCrit;
    for (std::size_t k = 0; k < crit.size(); ++k) {
        r.critical_values.emplace_back(kKpssLevels[k], crit[k]);
    }
    if (r.statistic <= crit.front()) {
        r.p_value = kKpssLevels.front();
        r.p_bound = PBound::Above;
    } else if (r.statistic >= crit.back()) {
        r.p_value = kKpssLevels.back();
        r.p_bound = PBound::Below;
    } else {
        for (std::size_t k = 1; k < crit.size(); ++k) {
            if (r.statistic <= crit[k]) {
                const double f = (r.statistic - crit[k - 1]) / (crit[k] - crit[k - 1]);
                r.p_value = kKpssLevels[k - 1] + f * (kKpssLevels[k] - kKpssLevels[k - 1]);
                break;
            }
        }
    }
    r.reject = r.statistic > crit[1];
    return r;
}

double kpss_multivariate_p_value(double statistic, std::size_t dim) {
    static std::mutex mutex;
    static std::map<std::size_t, std::vector<double>> cache;
    const std::vector<double>* draws = nullptr;
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(dim);
        if (it == cache.end()) {
            std::mt19937_64 rng(0x6b707373ULL + dim);
            std::gamma_distribution<double> chi2(0.5 * static_cast<double>(dim), 2.0);
            const double pi2 = std::numbers::pi * std::numbers::pi;
            const double tail = static_cast<double>(dim) / (pi2 * static_cast<double>(kKpssSeriesTerms));
            std::vector<double> v(kKpssNullDraws);
            for (auto& x : v) {
                double sum = tail;
                for (std::size_t k = 1; k <= kKpssSeriesTerms; ++k) {
                    sum += chi2(rng) / (pi2 * static_cast<double>(k * k));
                }
                x = sum;
            }
            std::sort(v.begin(), v.end());
            it = cache.emplace(dim, std::move(v)).first;
        }
        draws = &it->second;
    }
    const auto above = static_cast<double>(draws->end() - std::lower_bound(draws->begin(), draws->end(), statistic));
    return above / static_cast<double>(draws->size());
}

TestResult kpss_multivariate(const Matrix& panel, long lags) {
    const Eigen::Index n = panel.rows();
    const Eigen::Index d = panel.cols();
    if (n <= d || n <= 10) {
        throw Error(fmt::format("multivariate KPSS needs more rows ({}) than columns ({}) and at least 11", n, d));
    }
    const Matrix e = panel.rowwise() - panel.colwise().mean();
    TestResult r;
    r.method = "multivariate KPSS (Nyblom-Harvey)";
    r.null_hypothesis = "jointly level stationary";
    r.n = static_cast<std::size_t>(n);
    r.lags = resolve_lags(lags, r.n);
    const Matrix omega = bartlett_long_run(e, r.lags);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(omega, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
        throw Error("long-run covariance is singular; reduce the dimension (e.g. drop collinear delivery periods)");
    }
    const Matrix c = partial_sum_moment(e);
    r.statistic = omega.ldlt().solve(c).trace();
    const auto dim = static_cast<std::size_t>(d);
    r.p_value = kpss_multivariate_p_value(r.statistic, dim);
    if (r.p_value == 0.0) {
        r.p_value = 1.0 / static_cast<double>(kKpssNullDraws);
        r.p_bound = PBound::Below;
    }
    r.reject = r.p_value < 0.05;
    return r;
}

std::string to_string(AdfDeterministic spec) {
    switch (spec) {
    case AdfDeterministic::None:
        return "n";
    case AdfDeterministic::Constant:
        return "c";
    case AdfDeterministic::Trend:
        return "ct";
    }
    return "c";
}

std::pair<double, PBound> adf_p_value(double t_stat, AdfDeterministic spec) {
    const auto& table = adf_table();
    const auto it = table.rows.find(spec);
    if (it == table.rows.end() || it->second.first.size() < 2) {
        throw Error(fmt::format("ADF quantile table has no rows for specification '{}'", to_string(spec)));
    }
    const auto& [probs, quants] = it->second;
    if (t_stat <= quants.front()) {
        return {probs.front(), PBound::Below};
    }
    if (t_stat >= quants.back()) {
        return {probs.back(), PBound::Above};
    }
    const auto up = static_cast<std::size_t>(std::upper_bound(quants.begin(), quants.end(), t_stat) - quants.begin());
    const double f = (t_stat - quants[up - 1]) / (quants[up] - quants[up - 1]);
    return {probs[up - 1] + f * (probs[up] - probs[up - 1]), PBound::Exact};
}

TestResult adf(const Vector& series, long max_lags, AdfDeterministic spec) {
    const auto n = static_cast<std::size_t>(series.size());
    const std::size_t pmax = max_lags < 0
        ? static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)))
        : static_cast<std::size_t>(max_lags);
    if (n <= pmax + 10) {
        throw Error(fmt::format("ADF needs more than {} observations for {} lags, got {}", pmax + 10, pmax, n));
    }
    const std::size_t kdet = deterministic_columns(spec);
    const Vector dy = series.tail(static_cast<Eigen::Index>(n - 1)) - series.head(static_cast<Eigen::Index>(n - 1));

    // Columns: deterministics, lagged level, lagged differences 1..p; last column is the response.
    auto design = [&](std::size_t first, std::size_t p) {
        const auto rows = static_cast<Eigen::Index>(n - 1 - first);
        Matrix z(rows, static_cast<Eigen::Index>(kdet + 1 + p + 1));
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto t = static_cast<Eigen::Index>(first) + r; // index into dy
            Eigen::Index c = 0;
            if (kdet >= 1) {
                z(r, c++) = 1.0;
            }
            if (kdet >= 2) {
                z(r, c++) = static_cast<double>(t + 1);
            }
            z(r, c++) = series(t);
            for (std::size_t l = 1; l <= p; ++l) {
                z(r, c++) = dy(t - static_cast<Eigen::Index>(l));
            }
            z(r, c) = dy(t);
        }
        return z;
    };

    auto ssr_of = [](const Matrix& gram, Eigen::Index k) {
        const Matrix g = gram.topLeftCorner(k, k);
        const Vector xy = gram.col(gram.cols() - 1).head(k);
        const Vector b = g.ldlt().solve(xy);
        return gram(gram.rows() - 1, gram.cols() - 1) - b.dot(xy);
    };

    // Lag selection on the common sample that every candidate can use.
    const Matrix common = design(pmax, pmax);
    const Matrix gram = common.transpose() * common;
    const auto m = static_cast<double>(common.rows());
    std::size_t best = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p <= pmax; ++p) {
        const auto k = static_cast<Eigen::Index>(kdet + 1 + p);
        const double ssr = std::max(ssr_of(gram, k), 1e-300);
        const double aic = m * std::log(ssr / m) + 2.0 * static_cast<double>(k);
        if (aic < best_aic - 1e-12) {
            best_aic = aic;
            best = p;
        }
    }

    const Matrix z = design(best, best);
    const Eigen::Index k = z.cols() - 1;
    const Matrix x = z.leftCols(k);
    const Vector y = z.col(k);
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < k) {
        throw Error("ADF regression is rank deficient (degenerate series)");
    }
    const Vector b = qr.solve(y);
    const double dof = static_cast<double>(x.rows() - k);
    const double s2 = (y - x * b).squaredNorm() / dof;
    const Matrix xtx_inv = (x.transpose() * x).ldlt().solve(Matrix::Identity(k, k));
    const auto level = static_cast<Eigen::Index>(kdet);
    const double se = std::sqrt(s2 * xtx_inv(level, level));
    if (!(se > 0.0)) {
        throw Error("ADF standard error is degenerate");
    }

    TestResult r;
    r.method = fmt::format("ADF ({})", to_string(spec));
    r.null_hypothesis = "unit root";
    r.statistic = b(level) / se;
    r.lags = best;
    r.n = static_cast<std::size_t>(x.rows());
    const auto [p, bound] = adf_p_value(r.statistic, spec);
    r.p_value = p;
    r.p_bound = bound;
    const auto& [probs, quants] = adf_table().rows.at(spec);
    for (double level_p : {0.01, 0.05, 0.10}) {
        const auto it = std::lower_bound(probs.begin(), probs.end(), level_p - 1e-12);
        if (it != probs.end() && std::abs(*it - level_p) < 1e-9) {
            r.critical_values.emplace_back(level_p, quants[static_cast<std::size_t>(it - probs.begin())]);
        }
    }
    r.reject = r.p_value < 0.05;
    return r;
}

std::vector<double> simulate_adf_null(AdfDeterministic spec, std::size_t sample_size, std::size_t draws,
                                      std::uint64_t seed) {
    if (sample_size < 10) {
        throw Error("ADF null simulation needs at least 10 observations");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const std::size_t kdet = deterministic_columns(spec);
    const auto k = static_cast<Eigen::Index>(kdet + 1);
    std::vector<double> out;
    out.reserve(draws);
    Eigen::Matrix4d g;
    for (std::size_t d = 0; d < draws; ++d) {
        g.setZero();
        double level = 0.0;
        for (std::size_t t = 1; t < sample_size; ++t) {
            const double e = normal(rng);
            Eigen::Vector4d z;
            Eigen::Index c = 0;
            if (kdet >= 1) {
                z(c++) = 1.0;
            }
            if (kdet >= 2) {
                z(c++) = static_cast<double>(t);
            }
            z(c++) = level;
            z(c) = e;
            const auto head = z.head(k + 1);
            g.topLeftCorner(k + 1, k + 1).noalias() += head * head.transpose();
            level += e;
        }
        const Matrix gram = g.topLeftCorner(k + 1, k + 1);
        const Matrix xtx = gram.topLeftCorner(k, k);
        const Vector xty = gram.col(k).head(k);
        const Eigen::LDLT<Matrix> ldlt(xtx);
        const Vector b = ldlt.solve(xty);
        const double ssr = gram(k, k) - b.dot(xty);
        const double s2 = ssr / static_cast<double>(static_cast<Eigen::Index>(sample_size - 1) - k);
        const Vector unit = Vector::Unit(k, k - 1);
        const double var = s2 * ldlt.solve(unit)(k - 1);
        out.push_back(b(k - 1) / std::sqrt(var));
    }
    return out;
}

std::vector<double> adf_table_probabilities() {
    std::vector<double> p{0.0001, 0.0005, 0.001, 0.0025, 0.005, 0.0075};
    for (int k = 1; k <= 99; ++k) {
        p.push_back(k / 100.0);
    }
    for (double x : {0.9925, 0.995, 0.9975, 0.999, 0.9995, 0.9999}) {
        p.push_back(x);
    }
    return p;
}

} // namespace elvol

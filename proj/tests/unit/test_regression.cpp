#include "elvol/regression.hpp"

#include <doctest.h>

#include <boost/math/distributions/students_t.hpp>
#include <random>

using namespace elvol;

namespace {

struct Sample {
    Matrix x;
    Vector y;
};

Sample linear_sample(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Sample s{Matrix(n, 2), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        s.x(i, 0) = 1.0;
        s.x(i, 1) = normal(rng);
        s.y(i) = 1.0 + 2.0 * s.x(i, 1) + normal(rng);
    }
    return s;
}

} // namespace

TEST_CASE("classical OLS matches the simple-regression formulas") {
    const auto s = linear_sample(60, 1);
    const auto r = ols_classical(s.y, s.x, {"const", "x"});
    const Vector xc = s.x.col(1).array() - s.x.col(1).mean();
    const Vector yc = s.y.array() - s.y.mean();
    const double slope = xc.dot(yc) / xc.squaredNorm();
    const double intercept = s.y.mean() - slope * s.x.col(1).mean();
    CHECK(r.coef(1) == doctest::Approx(slope).epsilon(1e-12));
    CHECK(r.coef(0) == doctest::Approx(intercept).epsilon(1e-12));
    const Vector resid = s.y - s.x * r.coef;
    const double s2 = resid.squaredNorm() / 58.0;
    CHECK(r.se(1) == doctest::Approx(std::sqrt(s2 / xc.squaredNorm())).epsilon(1e-12));
    const boost::math::students_t t(58);
    CHECK(r.p_values(1) == doctest::Approx(2.0 * boost::math::cdf(boost::math::complement(t, std::abs(r.t_stats(1))))));
    CHECK(r.r2 == doctest::Approx(1.0 - resid.squaredNorm() / yc.squaredNorm()));
    CHECK(r.index_of("x") == 1);
    CHECK_THROWS_AS(r.index_of("z"), Error);
}

TEST_CASE("Newey-West covariance against an explicit double loop") {
    const auto s = linear_sample(40, 2);
    const auto r = ols_hac(s.y, s.x, {"const", "x"}, 3);
    const Matrix xtx_inv = (s.x.transpose() * s.x).inverse();
    Matrix omega = Matrix::Zero(2, 2);
    for (Eigen::Index t = 0; t < 40; ++t) {
        for (Eigen::Index u = 0; u < 40; ++u) {
            const auto lag = std::abs(t - u);
            if (lag > 3) {
                continue;
            }
            const double w = 1.0 - static_cast<double>(lag) / 4.0;
            omega += w * r.residuals(t) * r.residuals(u) * s.x.row(t).transpose() * s.x.row(u);
        }
    }
    const Matrix expected = xtx_inv * omega * xtx_inv;
    CHECK((r.cov - expected).norm() < 1e-10 * expected.norm());
    CHECK(r.kind == CovarianceKind::Hac);
    CHECK(r.p_values(1) == doctest::Approx(normal_p_value(r.t_stats(1))));
}

TEST_CASE("lag zero is the White covariance") {
    const auto s = linear_sample(30, 3);
    const auto r = ols_hac(s.y, s.x, {"const", "x"}, 0);
    const Matrix xtx_inv = (s.x.transpose() * s.x).inverse();
    Matrix meat = Matrix::Zero(2, 2);
    for (Eigen::Index t = 0; t < 30; ++t) {
        meat += r.residuals(t) * r.residuals(t) * s.x.row(t).transpose() * s.x.row(t);
    }
    CHECK((newey_west_cov(s.x, r.residuals, 0) - xtx_inv * meat * xtx_inv).norm() < 1e-12);
}

TEST_CASE("collinear designs name the offending columns") {
    Matrix x(10, 3);
    for (Eigen::Index i = 0; i < 10; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = static_cast<double>(i);
        x(i, 2) = 2.0 * static_cast<double>(i) + 1.0;
    }
    try {
        require_full_rank(x, {"const", "trend", "copy"});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("copy") != std::string::npos);
    }
    CHECK_THROWS_AS(ols_classical(Vector::Ones(10), x, {"const", "trend", "copy"}), Error);
}

TEST_CASE("Wald equality and residualization") {
    const auto s = linear_sample(200, 4);
    const auto r = ols_classical(s.y, s.x, {"const", "x"});
    const auto w = wald_equality(r, 0, 1);
    const double diff = r.coef(0) - r.coef(1);
    const double var = r.cov(0, 0) + r.cov(1, 1) - 2.0 * r.cov(0, 1);
    CHECK(w.statistic == doctest::Approx(diff * diff / var));
    CHECK(w.p_value < 1e-6);
    const Matrix resid = residualize(s.y, s.x.col(1));
    CHECK(std::abs(resid.col(0).sum()) < 1e-9);
    CHECK(std::abs(resid.col(0).dot(s.x.col(1))) < 1e-9);
    CHECK(normal_p_value(1.959963984540054) == doctest::Approx(0.05));
}

TEST_CASE("propagation-share uncertainty regression and tables") {
    Vector hours(24);
    Vector wind(24);
    Vector solar(24);
    Vector ps(24);
    for (Eigen::Index h = 0; h < 24; ++h) {
        hours(h) = static_cast<double>(h + 1);
        wind(h) = std::cos(0.3 * static_cast<double>(h));
        solar(h) = std::max(0.0, std::sin(kTwoPi * (static_cast<double>(h) - 6.0) / 24.0));
        ps(h) = 0.4 + 0.01 * hours(h) / 24.0 + 0.05 * solar(h) + 0.01 * std::sin(static_cast<double>(h * h));
    }
    const auto r = ps_uncertainty_regression(ps, hours, wind, solar);
    CHECK(r.names == std::vector<std::string>{"alpha", "hour", "wind", "solar"});
    CHECK(r.kind == CovarianceKind::Classical);
    CHECK(r.coef(0) == doctest::Approx(ps.mean()));
    const auto table = format_regression_table({r}, {"PS"});
    CHECK(table.find("Significance: *** p<0.01, ** p<0.05, * p<0.1") != std::string::npos);
    CHECK(table.find("alpha") != std::string::npos);
    const auto csv = regression_csv({r}, {"PS"});
    CHECK(csv.rfind("model,term,coef,se,t,p", 0) == 0);
}

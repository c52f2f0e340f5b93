#include "elvol/stationarity.hpp"

#include <doctest.h>

#include <random>

using namespace elvol;

namespace {

// Reference values were computed with statsmodels 0.14 (kpss, adfuller) on the same series.
Vector kpss_series() {
    Vector x(300);
    for (Eigen::Index t = 0; t < 300; ++t) {
        const double td = static_cast<double>(t);
        x(t) = std::sin(0.7 * td) + 0.5 * std::cos(std::fmod(0.13 * td * td, 7.0)) + 0.002 * td;
    }
    return x;
}

Vector adf_series() {
    Vector y(300);
    double level = 0.0;
    for (Eigen::Index t = 0; t < 300; ++t) {
        const double td = static_cast<double>(t);
        level += std::sin(1.3 * td) + 0.3 * std::cos(std::fmod(0.41 * td * td, 5.0));
        y(t) = level;
    }
    return y;
}

} // namespace

TEST_CASE("default bandwidth") {
    CHECK(default_kpss_lags(100) == 4);
    CHECK(default_kpss_lags(1000) == 6);
}

TEST_CASE("KPSS statistic agrees with an external reference") {
    const auto x = kpss_series();
    const auto level = kpss_univariate(x, KpssNull::Level, 5);
    CHECK(level.statistic == doctest::Approx(0.9791959986094496).epsilon(1e-9));
    CHECK(level.reject);
    CHECK(level.p_bound == PBound::Below);
    CHECK(level.p_text() == "< 0.01");
    const auto trend = kpss_univariate(x, KpssNull::Trend, 5);
    CHECK(trend.statistic == doctest::Approx(0.0369889456896977).epsilon(1e-9));
    CHECK_FALSE(trend.reject);
    CHECK(trend.p_bound == PBound::Above);
    CHECK_THROWS_AS(kpss_univariate(Vector::Constant(50, 3.0)), Error);
}

TEST_CASE("multivariate KPSS reduces to the univariate statistic in one dimension") {
    const auto x = kpss_series();
    const auto uni = kpss_univariate(x, KpssNull::Level, 5);
    const auto multi = kpss_multivariate(Matrix(x), 5);
    CHECK(multi.statistic == doctest::Approx(uni.statistic).epsilon(1e-12));
    CHECK(kpss_multivariate_p_value(0.463, 1) == doctest::Approx(0.05).epsilon(0.1));
    CHECK(kpss_multivariate_p_value(0.739, 1) == doctest::Approx(0.01).epsilon(0.15));
}

TEST_CASE("multivariate KPSS rejects singular long-run covariances") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    Matrix m(200, 2);
    for (Eigen::Index t = 0; t < 200; ++t) {
        m(t, 0) = normal(rng);
        m(t, 1) = -m(t, 0);
    }
    CHECK_THROWS_AS(kpss_multivariate(m), Error);
}

TEST_CASE("ADF statistic agrees with an external reference") {
    const auto y = adf_series();
    CHECK(adf(y, 0, AdfDeterministic::Constant).statistic == doctest::Approx(-1.5496538237553206).epsilon(1e-9));
    CHECK(adf(y, 0, AdfDeterministic::None).statistic == doctest::Approx(-0.22303970314072).epsilon(1e-9));
    CHECK(adf(y, 0, AdfDeterministic::Trend).statistic == doctest::Approx(-6.571712400709288).epsilon(1e-9));
    const auto c = adf(y, 6, AdfDeterministic::Constant);
    CHECK(c.lags == 5);
    CHECK(c.statistic == doctest::Approx(-0.6967338839397673).epsilon(1e-9));
    CHECK(c.p_value == doctest::Approx(0.8476).epsilon(0.03));
    const auto ct = adf(y, 6, AdfDeterministic::Trend);
    CHECK(ct.statistic == doctest::Approx(-2.785581113142578).epsilon(1e-9));
    CHECK(ct.p_value == doctest::Approx(0.2023).epsilon(0.08));
}

TEST_CASE("ADF p-values are monotone and bounded") {
    double previous = 0.0;
    for (double t = -6.0; t <= 2.0; t += 0.25) {
        const auto [p, bound] = adf_p_value(t, AdfDeterministic::Constant);
        CHECK(p >= previous);
        previous = p;
        (void)bound;
    }
    CHECK(adf_p_value(-2.8676, AdfDeterministic::Constant).first == doctest::Approx(0.05).epsilon(0.02));
    CHECK(adf_p_value(-50.0, AdfDeterministic::Trend).second == PBound::Below);
    CHECK_THROWS_AS(adf(Vector::Ones(12), 5), Error);
}

TEST_CASE("simulated null matches the tabulated quantiles") {
    auto draws = simulate_adf_null(AdfDeterministic::Constant, 500, 20000, 99);
    std::sort(draws.begin(), draws.end());
    CHECK(draws[1000] == doctest::Approx(-2.87).epsilon(0.03));
}

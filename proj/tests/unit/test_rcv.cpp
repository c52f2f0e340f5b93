#include "elvol/rcv.hpp"

#include <doctest.h>

#include <random>

using namespace elvol;

namespace {

Matrix gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

} // namespace

TEST_CASE("rolling and disjoint windows match loop sums") {
    const Matrix inc = gaussian(30, 3, 1);
    RcvOptions opt;
    opt.window = 7;
    const auto rolling = realized_covariation(inc, {}, opt);
    CHECK(rolling.size() == 24);
    for (std::size_t k : {std::size_t{0}, std::size_t{10}, std::size_t{23}}) {
        Matrix expected = Matrix::Zero(3, 3);
        for (std::size_t n = k; n < k + 7; ++n) {
            for (Eigen::Index i = 0; i < 3; ++i) {
                for (Eigen::Index j = 0; j < 3; ++j) {
                    expected(i, j) += inc(static_cast<Eigen::Index>(n), i) * inc(static_cast<Eigen::Index>(n), j);
                }
            }
        }
        expected /= (7.0 / 365.0);
        CHECK((rolling.mats[k] - expected).cwiseAbs().maxCoeff() < 1e-12 * expected.cwiseAbs().maxCoeff());
        CHECK(rolling.mats[k] == rolling.mats[k].transpose());
    }
    opt.rolling = false;
    const auto disjoint = realized_covariation(inc, {}, opt);
    CHECK(disjoint.size() == 4);
    CHECK((disjoint.mats[1] - rolling.mats[7]).norm() < 1e-12 * rolling.mats[7].norm());
}

TEST_CASE("windows are dated by their last increment") {
    Matrix rows = gaussian(10, 2, 2);
    std::vector<Date> dates;
    for (int k = 0; k < 10; ++k) {
        dates.push_back(add_days(parse_date("2024-01-01"), k));
    }
    const auto s = rcv_naive(rows, dates);
    REQUIRE(s.size() == 3);
    CHECK(s.dates.front() == dates[7]);
    CHECK(s.dates.back() == dates[9]);
    CHECK_FALSE(s.adjusted);
}

TEST_CASE("a window longer than the sample is an error") {
    CHECK_THROWS_AS(realized_covariation(gaussian(5, 2, 3), {}), Error);
}

TEST_CASE("average-price variance equals the scaled grand sum for uniform weights") {
    const auto s = realized_covariation(gaussian(50, 4, 4), {});
    const Vector w = Vector::Constant(4, 0.25);
    const Vector rv = rv_average_price(s, w);
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(rv(static_cast<Eigen::Index>(k)) == doctest::Approx(s.mats[k].sum() / 16.0).epsilon(1e-13));
    }
}

TEST_CASE("realized correlation") {
    Matrix m(2, 2);
    m << 4.0, 1.0, 1.0, 9.0;
    const Matrix r = realized_correlation(m);
    CHECK(r(0, 0) == doctest::Approx(1.0));
    CHECK(r(0, 1) == doctest::Approx(1.0 / 6.0));
    m(1, 1) = 0.0;
    CHECK_THROWS_AS(realized_correlation(m), Error);
}

TEST_CASE("propagation share from residual panels") {
    ResidualPanel res;
    res.eps = gaussian(100, 2, 5);
    res.bhat = 0.5 * gaussian(100, 2, 6);
    res.diffs = res.eps + res.bhat;
    const auto p = propagation_share(res);
    const double expected = res.bhat.squaredNorm() / res.diffs.squaredNorm();
    CHECK(p.ps_total == doctest::Approx(expected));
    CHECK(p.ps_per_hour(1) == doctest::Approx(res.bhat.col(1).squaredNorm() / res.diffs.col(1).squaredNorm()));
    CHECK(p.total_level(0) == doctest::Approx(365.0 * res.diffs.col(0).squaredNorm() / 100.0));
}

TEST_CASE("long-span average and relative eigenvalue") {
    RcvSeries s;
    s.mats = {Matrix::Identity(2, 2), 3.0 * Matrix::Identity(2, 2)};
    CHECK(long_span_average(s) == 2.0 * Matrix::Identity(2, 2));
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -0.5;
    CHECK(min_relative_eigenvalue(m) == doctest::Approx(-1.0));
    CHECK(min_relative_eigenvalue(Matrix::Zero(2, 2)) == 0.0);
}

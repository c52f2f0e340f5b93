#include "elvol/factor.hpp"

#include <doctest.h>

#include <random>

using namespace elvol;

namespace {

Matrix random_psd(Eigen::Index d, Eigen::Index k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix g(d, k);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            g(i, j) = normal(rng);
        }
    }
    return g * g.transpose();
}

} // namespace

TEST_CASE("decomposition reconstructs the matrix") {
    const Matrix m = random_psd(12, 20, 1);
    const auto dec = eigendecompose(m);
    CHECK((m - dec.reconstruct()).norm() <= 1e-10 * m.trace());
    for (Eigen::Index k = 1; k < dec.eigenvalues.size(); ++k) {
        CHECK(dec.eigenvalues(k - 1) >= dec.eigenvalues(k));
    }
    CHECK(dec.explained.sum() == doctest::Approx(1.0));
    for (Eigen::Index k = 0; k < dec.directions.cols(); ++k) {
        CHECK(dec.directions.col(k).sum() >= 0.0);
        CHECK(dec.loadings.col(k).norm() == doctest::Approx(std::sqrt(dec.eigenvalues(k))));
    }
    CHECK((dec.directions.transpose() * dec.directions - Matrix::Identity(12, 12)).norm() < 1e-10);
}

TEST_CASE("rank-one matrix explains everything with its first factor") {
    Vector v(6);
    v << 0.3, 1.1, 0.7, 2.0, 0.4, 0.9;
    const auto dec = eigendecompose(v * v.transpose());
    CHECK(dec.explained(0) == 1.0);
    CHECK((dec.eigenvalues.tail(5).array() == 0.0).all());
    CHECK(variance_explained_count(dec, 0.95) == 1);
    CHECK((dec.directions.col(0) - v.normalized()).norm() < 1e-12);
}

TEST_CASE("invalid matrices are rejected") {
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(eigendecompose(asym), Error);
    Matrix neg = Matrix::Identity(3, 3);
    neg(2, 2) = -0.5;
    CHECK_THROWS_AS(eigendecompose(neg), Error);
    Matrix tiny = Matrix::Identity(3, 3);
    tiny(2, 2) = -1e-14;
    const auto dec = eigendecompose(tiny);
    CHECK(dec.eigenvalues(2) == 0.0);
}

TEST_CASE("scores project observations on the directions") {
    const Matrix m = random_psd(4, 6, 2);
    const auto dec = eigendecompose(m);
    Matrix x(3, 4);
    x << 1, 2, 3, 4, 0, 1, 0, 1, -1, 0, 2, 5;
    const auto scores = factor_scores(dec, x, {}, 2);
    CHECK(scores.scores.cols() == 2);
    CHECK(scores.scores(2, 1) == doctest::Approx(dec.directions.col(1).dot(x.row(2).transpose())));
}

TEST_CASE("sign alignment is a chain and idempotent") {
    Matrix surface(4, 3);
    surface << -1, -2, -1, 1, 2, 1.1, -0.9, -2, -1, 1, 2, 1;
    align_signs(surface);
    CHECK(surface.row(0).sum() >= 0.0);
    for (Eigen::Index r = 1; r < surface.rows(); ++r) {
        CHECK(surface.row(r).dot(surface.row(r - 1)) >= 0.0);
    }
    Matrix again = surface;
    align_signs(again);
    CHECK(again == surface);
}

TEST_CASE("rolling loadings") {
    RcvSeries s;
    for (int k = 0; k < 5; ++k) {
        s.mats.push_back(random_psd(5, 8, 10 + static_cast<std::uint64_t>(k)));
        s.dates.push_back(add_days(parse_date("2024-01-07"), k));
    }
    const auto lo = rolling_loadings(s, 2);
    REQUIRE(lo.surfaces.size() == 2);
    CHECK(lo.surfaces[0].rows() == 5);
    CHECK(lo.surfaces[0].cols() == 5);
    CHECK(lo.eigenvalues.rows() == 5);
    CHECK(lo.eigenvalues(3, 0) == doctest::Approx(eigendecompose(s.mats[3]).eigenvalues(0)));
    const Matrix diag = rcv_diagonals(s);
    CHECK(diag(2, 4) == s.mats[2](4, 4));
}

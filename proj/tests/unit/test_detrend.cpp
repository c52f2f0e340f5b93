#include "elvol/detrend.hpp"

#include <doctest.h>

#include <Eigen/QR>
#include <random>

using namespace elvol;

namespace {

PricePanel synthetic(std::size_t days, std::uint64_t seed, double noise) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const std::array<double, 7> dow{0.0, 1.0, 2.0, -1.0, 0.5, -3.0, -4.0};
    std::vector<Date> dates;
    Matrix v(static_cast<Eigen::Index>(days), 3);
    const Date start = parse_date("2023-01-02"); // Monday
    for (std::size_t n = 0; n < days; ++n) {
        const Date d = add_days(start, static_cast<long>(n));
        dates.push_back(d);
        for (Eigen::Index h = 0; h < 3; ++h) {
            v(static_cast<Eigen::Index>(n), h) =
                40.0 + 0.05 * static_cast<double>(n) * static_cast<double>(h + 1) + dow[weekday_index(d)] + noise * normal(rng);
        }
    }
    return PricePanel(dates, v, DeliveryPartition::uniform(3), "T");
}

// Direct weighted least squares for one target row, solved by Householder QR.
double oracle_mhat(const PricePanel& p, std::size_t n, Eigen::Index col, double bandwidth) {
    std::vector<std::size_t> used;
    for (std::size_t k = 0; k < n; ++k) {
        if (epanechnikov(static_cast<double>(n - k) / bandwidth) > 0.0) {
            used.push_back(k);
        }
    }
    Matrix x(static_cast<Eigen::Index>(used.size()), 8);
    Vector y(static_cast<Eigen::Index>(used.size()));
    for (std::size_t r = 0; r < used.size(); ++r) {
        const std::size_t k = used[r];
        const double w = std::sqrt(epanechnikov(static_cast<double>(n - k) / bandwidth));
        const auto ri = static_cast<Eigen::Index>(r);
        x.row(ri).setZero();
        x(ri, 0) = w;
        x(ri, 1) = w * (static_cast<double>(k) - static_cast<double>(n));
        const int wd = weekday_index(p.dates()[k]);
        if (wd > 0) {
            x(ri, 1 + wd) = w;
        }
        y(ri) = w * p.values()(static_cast<Eigen::Index>(k), col);
    }
    const Vector beta = x.householderQr().solve(y);
    const int wd = weekday_index(p.dates()[n]);
    return beta(0) + (wd > 0 ? beta(1 + wd) : 0.0);
}

} // namespace

TEST_CASE("Epanechnikov kernel") {
    CHECK(epanechnikov(0.0) == 0.75);
    CHECK(epanechnikov(0.5) == doctest::Approx(0.5625));
    CHECK(epanechnikov(1.0) == 0.0);
    CHECK(epanechnikov(-1.5) == 0.0);
}

TEST_CASE("fitted mean agrees with a direct weighted least-squares solve") {
    const auto panel = synthetic(200, 3, 1.0);
    DetrendConfig cfg;
    cfg.bandwidth_days = 30.0;
    const auto dm = local_linear_demean(panel, cfg);
    for (std::size_t n : {dm.valid_from, dm.valid_from + 17, std::size_t{199}}) {
        for (Eigen::Index h = 0; h < 3; ++h) {
            const double expected = oracle_mhat(panel, n, h, cfg.bandwidth_days);
            CHECK(dm.mhat(static_cast<Eigen::Index>(n), h) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("linear trend with weekday effects is removed exactly") {
    const auto panel = synthetic(150, 1, 0.0);
    DetrendConfig cfg;
    cfg.bandwidth_days = 30.0;
    const auto dm = local_linear_demean(panel, cfg);
    CHECK(dm.valid_from > 0);
    CHECK(dm.valid_rows().cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::isnan(dm.values(0, 0)));
    CHECK_FALSE(dm.valid[0]);
    CHECK(dm.valid_dates().size() == static_cast<std::size_t>(dm.valid_rows().rows()));
}

TEST_CASE("fit is causal") {
    const auto panel = synthetic(150, 2, 1.0);
    Matrix changed = panel.values();
    changed.row(120).array() += 1000.0;
    const PricePanel shocked(panel.dates(), changed, panel.partition(), panel.zone());
    DetrendConfig cfg;
    cfg.bandwidth_days = 30.0;
    const auto a = local_linear_demean(panel, cfg);
    const auto b = local_linear_demean(shocked, cfg);
    CHECK(a.mhat.middleRows(a.valid_from, 121 - a.valid_from) == b.mhat.middleRows(a.valid_from, 121 - a.valid_from));
    CHECK(a.mhat.row(121) != b.mhat.row(121));
}

TEST_CASE("too short a panel is rejected") {
    const auto panel = synthetic(10, 1, 1.0);
    CHECK_THROWS_AS(local_linear_demean(panel), Error);
}

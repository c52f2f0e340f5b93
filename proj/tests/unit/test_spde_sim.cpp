#include "elvol/spde_sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace elvol;

namespace {

double bin_average(double lo, double hi, const auto& f) {
    const int steps = 20000;
    double sum = 0.0;
    for (int s = 0; s < steps; ++s) {
        sum += f(lo + (hi - lo) * (s + 0.5) / steps);
    }
    return sum / steps;
}

SimConfig small_config() {
    SimConfig c;
    c.modes = 2;
    c.kappa = 30.0;
    c.zero_mode_lambda = -20.0;
    c.mode_sigma = {1.0, 0.5, 2.0};
    c.partition = DeliveryPartition::uniform(5);
    c.days = 300;
    return c;
}

} // namespace

TEST_CASE("observation matrix holds bin averages of the Fourier basis") {
    const auto p = DeliveryPartition::from_breakpoints({0.0, 1.0, 2.5, 4.0, kTwoPi});
    const Matrix b = fourier_observation_matrix(p, 3);
    REQUIRE(b.cols() == 7);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        CHECK(b(row, 0) == 1.0);
        for (int k = 1; k <= 3; ++k) {
            const double c = bin_average(p.start(i), p.end(i), [k](double h) { return std::cos(k * h); });
            const double s = bin_average(p.start(i), p.end(i), [k](double h) { return std::sin(k * h); });
            CHECK(b(row, 2 * k - 1) == doctest::Approx(c).epsilon(1e-7));
            CHECK(b(row, 2 * k) == doctest::Approx(s).epsilon(1e-7));
        }
    }
}

TEST_CASE("heat-equation rates grow with the squared wavenumber") {
    const auto c = small_config();
    const Vector r = coordinate_rates(c);
    CHECK(r(0) == 20.0);
    CHECK(r(1) == 30.0);
    CHECK(r(2) == 30.0);
    CHECK(r(3) == 120.0);
    CHECK(coordinate_sigma(c)(4) == 2.0);
}

TEST_CASE("configuration validation") {
    auto c = small_config();
    c.mode_sigma = {1.0};
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.zero_mode_lambda = 1.0;
    CHECK_THROWS_AS(simulate_heat_spde(c), Error);
    c = small_config();
    c.vol_model = VolModel::Piecewise;
    c.vol_segments = {{10, 1.0}, {5, 2.0}};
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("simulation is seeded and observes local averages of the state") {
    const auto c = small_config();
    const auto a = simulate_heat_spde(c);
    const auto b = simulate_heat_spde(c);
    CHECK(a.panel.values() == b.panel.values());
    auto other = c;
    other.seed = 2;
    CHECK(simulate_heat_spde(other).panel.values() != a.panel.values());
    CHECK(a.panel.rows() == 300);
    CHECK(a.panel.zone() == "SIM");
    CHECK((a.panel.values() - a.state * a.observation.transpose() - a.mean_path).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("deterministic drift enters the mean path") {
    auto c = small_config();
    c.drift.level = 10.0;
    c.drift.trend_per_day = 0.5;
    c.drift.weekly = {0, 0, 0, 0, 0, -1.0, -2.0};
    const auto t = simulate_heat_spde(c);
    const int wd = weekday_index(t.panel.dates()[4]);
    CHECK(t.mean_path(4, 0) == doctest::Approx(10.0 + 2.0 + c.drift.weekly[static_cast<std::size_t>(wd)]));
    CHECK(t.mean_path(4, 0) == t.mean_path(4, 3));
}

TEST_CASE("exact discretization does not depend on the substep count") {
    auto c = small_config();
    c.vol_model = VolModel::Piecewise;
    c.vol_segments = {{0, 1.0}, {100, 2.5}, {200, 0.5}};
    c.substeps = 1;
    const auto one = simulate_heat_spde(c);
    c.substeps = 2;
    const auto two = simulate_heat_spde(c);
    CHECK((one.panel.values() - two.panel.values()).norm() <= 1e-12 * one.panel.values().norm());
    CHECK(one.innovation_var(150, 1) == doctest::Approx(6.25 * ou_step_variance(30.0, 0.5, c.delta)));
}

TEST_CASE("stochastic volatility runs and stays finite") {
    auto c = small_config();
    c.vol_model = VolModel::Stochastic;
    c.substeps = 8;
    const auto t = simulate_heat_spde(c);
    CHECK(t.panel.values().allFinite());
    CHECK((t.innovation_var.array() >= 0.0).all());
    CHECK_THROWS_AS(population_moments(c), Error);
}

TEST_CASE("one-step OU variance") {
    CHECK(ou_step_variance(10.0, 2.0, 0.1) == doctest::Approx(4.0 * (1.0 - std::exp(-2.0)) / 20.0));
    CHECK(ou_step_variance(0.0, 2.0, 0.1) == doctest::Approx(0.4));
}

TEST_CASE("population moments with an invertible observation map") {
    SimConfig c = small_config();
    const auto pop = population_moments(c);
    const Matrix b = fourier_observation_matrix(c.partition, c.modes);
    const Vector r = coordinate_rates(c);
    const Vector e = (-r * c.delta).array().exp();
    const Matrix s = b * e.asDiagonal() * b.inverse();
    CHECK((pop.predictor - s).norm() < 1e-9 * s.norm());
    CHECK((population_predictor(c) - s).norm() < 1e-9 * s.norm());
    // with an invertible map the residual is exactly the injected innovation
    CHECK((pop.adjusted_target - pop.innovation_target).norm() < 1e-8 * pop.innovation_target.norm());
    const Matrix naive = (pop.gamma * 2.0 - pop.cross - pop.cross.transpose()) / c.delta;
    CHECK((naive - pop.propagation_target - pop.innovation_target).norm() < 1e-8 * naive.norm());
}

TEST_CASE("semigroup-weighted integrated variance with constant volatility") {
    const auto c = small_config();
    const auto t = simulate_heat_spde(c);
    const Matrix iv = true_semigroup_weighted_iv(t, 100, 7);
    CHECK((iv - population_moments(c).innovation_target).norm() < 1e-9 * iv.norm());
    CHECK_THROWS_AS(true_semigroup_weighted_iv(t, 3, 7), Error);
}

TEST_CASE("univariate OU path") {
    const double lambda = std::log(0.8) * 365.0;
    const auto path = simulate_ou_1d(lambda, Vector::Constant(1, 1.0), 1.0 / 365.0, 50000, 3);
    CHECK(path.ar_coefficient == doctest::Approx(0.8));
    CHECK(path.stationary_variance == doctest::Approx(1.0 / (2.0 * -lambda)));
    const Vector lag = path.x.head(49999);
    const Vector lead = path.x.tail(49999);
    CHECK(lag.dot(lead) / lag.squaredNorm() == doctest::Approx(0.8).epsilon(0.02));
    const double var = path.x.squaredNorm() / 50000.0;
    CHECK(var == doctest::Approx(path.stationary_variance).epsilon(0.05));
    const double expected = (std::exp(2.0 * lambda / 365.0) - 1.0) / (2.0 * lambda / 365.0);
    CHECK(path.adjusted_target == doctest::Approx(expected));
    const auto fixed = simulate_ou_1d(lambda, Vector::Constant(1, 1.0), 1.0 / 365.0, 5, 3, 2.0);
    CHECK(fixed.x(0) == 2.0);
    CHECK_THROWS_AS(simulate_ou_1d(lambda, Vector::Constant(3, 1.0), 1.0 / 365.0, 10, 1), Error);
}

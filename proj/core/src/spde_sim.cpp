#include "elvol/spde_sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace elvol {

void SimConfig::validate() const {
    if (modes < 1) {
        throw Error("simulation needs at least one Fourier mode");
    }
    if (!(kappa >= 0.0)) {
        throw Error("diffusivity kappa must be nonnegative");
    }
    if (!(zero_mode_lambda <= 0.0)) {
        throw Error("zero-mode mean reversion lambda must be nonpositive");
    }
    if (mode_sigma.size() != modes + 1) {
        throw Error(fmt::format("mode_sigma needs {} entries (modes 0..{}), got {}", modes + 1, modes,
                                mode_sigma.size()));
    }
    for (double s : mode_sigma) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw Error("mode volatilities must be finite and nonnegative");
        }
    }
    if (substeps < 1) {
        throw Error("substeps must be at least 1");
    }
    if (days < 2) {
        throw Error("simulation needs at least two days");
    }
    if (!(delta > 0.0)) {
        throw Error("delta must be positive");
    }
    for (std::size_t k = 1; k < vol_segments.size(); ++k) {
        if (vol_segments[k].start_day <= vol_segments[k - 1].start_day) {
            throw Error("volatility segments must have increasing start days");
        }
    }
    for (const auto& seg : vol_segments) {
        if (!(seg.factor >= 0.0)) {
            throw Error("volatility segment factors must be nonnegative");
        }
    }
    if (vol_model == VolModel::Stochastic &&
        !(sqrt_factor.theta >= 0.0 && sqrt_factor.xi >= 0.0 && sqrt_factor.v0 >= 0.0)) {
        throw Error("square-root factor parameters must be nonnegative");
    }
    if (initial_state && static_cast<std::size_t>(initial_state->size()) != coordinates()) {
        throw Error(fmt::format("initial state needs {} coordinates", coordinates()));
    }
}

Matrix fourier_observation_matrix(const DeliveryPartition& partition, std::size_t modes) {
    const auto d = static_cast<Eigen::Index>(partition.size());
    Matrix b(d, static_cast<Eigen::Index>(2 * modes + 1));
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto bin = static_cast<std::size_t>(i);
        const double lo = partition.start(bin);
        const double hi = partition.end(bin);
        const double w = hi - lo;
        b(i, 0) = 1.0;
        for (std::size_t k = 1; k <= modes; ++k) {
            const double kk = static_cast<double>(k);
            const auto c = static_cast<Eigen::Index>(2 * k - 1);
            b(i, c) = (std::sin(kk * hi) - std::sin(kk * lo)) / (kk * w);
            b(i, c + 1) = (std::cos(kk * lo) - std::cos(kk * hi)) / (kk * w);
        }
    }
    return b;
}

Vector coordinate_rates(const SimConfig& config) {
    Vector r(static_cast<Eigen::Index>(config.coordinates()));
    r(0) = -config.zero_mode_lambda;
    for (std::size_t k = 1; k <= config.modes; ++k) {
        const double rate = config.kappa * static_cast<double>(k * k);
        r(static_cast<Eigen::Index>(2 * k - 1)) = rate;
        r(static_cast<Eigen::Index>(2 * k)) = rate;
    }
    return r;
}

Vector coordinate_sigma(const SimConfig& config) {
    Vector s(static_cast<Eigen::Index>(config.coordinates()));
    s(0) = config.mode_sigma[0];
    for (std::size_t k = 1; k <= config.modes; ++k) {
        s(static_cast<Eigen::Index>(2 * k - 1)) = config.mode_sigma[k];
        s(static_cast<Eigen::Index>(2 * k)) = config.mode_sigma[k];
    }
    return s;
}

double ou_step_variance(double rate, double sigma, double dt) {
    const double x = 2.0 * rate * dt;
    if (std::abs(x) < 1e-8) {
        return sigma * sigma * dt * (1.0 - 0.5 * x);
    }
    return sigma * sigma * (-std::expm1(-x)) / (2.0 * rate);
}

namespace {

double piecewise_factor(const SimConfig& config, std::size_t day) {
    double f = 1.0;
    for (const auto& seg : config.vol_segments) {
        if (seg.start_day <= day) {
            f = seg.factor;
        }
    }
    return f;
}

} // namespace

SimTruth simulate_heat_spde(const SimConfig& config) {
    config.validate();
    const auto n = static_cast<Eigen::Index>(config.days);
    const auto c = static_cast<Eigen::Index>(config.coordinates());
    const Vector rates = coordinate_rates(config);
    const Vector sigma = coordinate_sigma(config);
    const Matrix b = fourier_observation_matrix(config.partition, config.modes);
    const double delta = config.delta;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;

    Matrix state(n, c);
    Matrix injected = Matrix::Zero(n, c);
    Vector x(c);
    const double f0 = config.vol_model == VolModel::Piecewise ? piecewise_factor(config, 0) : 1.0;
    const double v_start = config.vol_model == VolModel::Stochastic ? config.sqrt_factor.v0 : 1.0;
    for (Eigen::Index j = 0; j < c; ++j) {
        if (config.initial_state) {
            x(j) = (*config.initial_state)(j);
        } else if (config.stationary_start && rates(j) > 0.0) {
            const double s = sigma(j) * f0 * std::sqrt(v_start);
            x(j) = s / std::sqrt(2.0 * rates(j)) * normal(rng);
        } else {
            x(j) = 0.0;
        }
    }
    state.row(0) = x.transpose();

    const Vector decay = (-rates * delta).array().exp();
    if (config.vol_model != VolModel::Stochastic) {
        // sigma is constant within each day, so one exact draw per day covers any substep count
        for (Eigen::Index t = 1; t < n; ++t) {
            const double f = config.vol_model == VolModel::Piecewise
                ? piecewise_factor(config, static_cast<std::size_t>(t - 1)) : 1.0;
            for (Eigen::Index j = 0; j < c; ++j) {
                const double var = ou_step_variance(rates(j), sigma(j) * f, delta);
                injected(t, j) = var;
                x(j) = decay(j) * x(j) + std::sqrt(var) * normal(rng);
            }
            state.row(t) = x.transpose();
        }
    } else {
        const auto steps = static_cast<Eigen::Index>(config.substeps);
        const double h = delta / static_cast<double>(steps);
        const Vector sub_decay = (-rates * h).array().exp();
        const auto& sf = config.sqrt_factor;
        double v = sf.v0;
        for (Eigen::Index t = 1; t < n; ++t) {
            for (Eigen::Index s = 0; s < steps; ++s) {
                const double vp = std::max(v, 0.0);
                const double remaining = h * static_cast<double>(steps - 1 - s);
                for (Eigen::Index j = 0; j < c; ++j) {
                    const double var = ou_step_variance(rates(j), sigma(j) * std::sqrt(vp), h);
                    injected(t, j) += var * std::exp(-2.0 * rates(j) * remaining);
                    x(j) = sub_decay(j) * x(j) + std::sqrt(var) * normal(rng);
                }
                v += sf.theta * (1.0 - vp) * h + sf.xi * std::sqrt(vp * h) * normal(rng);
            }
            state.row(t) = x.transpose();
        }
    }

    Matrix mean(n, b.rows());
    std::vector<Date> dates;
    dates.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index t = 0; t < n; ++t) {
        const Date date = add_days(config.start, static_cast<long>(t));
        dates.push_back(date);
        const double m = config.drift.level + config.drift.trend_per_day * static_cast<double>(t) +
                         config.drift.weekly[static_cast<std::size_t>(weekday_index(date))];
        mean.row(t).setConstant(m);
    }
    Matrix values = state * b.transpose() + mean;

    return SimTruth{PricePanel(std::move(dates), std::move(values), config.partition, "SIM"),
                    std::move(state),
                    b,
                    rates,
                    sigma,
                    std::move(injected),
                    std::move(mean),
                    config};
}

Matrix true_semigroup_weighted_iv(const SimTruth& truth, std::size_t end_row, std::size_t window) {
    const auto n = static_cast<std::size_t>(truth.innovation_var.rows());
    if (window < 1 || end_row >= n || end_row < window) {
        throw Error(fmt::format("window of {} days ending at row {} is outside the simulated range", window, end_row));
    }
    const Vector injected = truth.innovation_var
                                .middleRows(static_cast<Eigen::Index>(end_row + 1 - window),
                                            static_cast<Eigen::Index>(window))
                                .colwise()
                                .sum()
                                .transpose();
    const double scale = 1.0 / (truth.config.delta * static_cast<double>(window));
    Matrix m = scale * truth.observation * injected.asDiagonal() * truth.observation.transpose();
    return 0.5 * (m + m.transpose());
}

PopulationMoments population_moments(const SimConfig& config) {
    config.validate();
    if (config.vol_model != VolModel::Constant) {
        throw Error("population moments need a constant-volatility configuration");
    }
    const Vector rates = coordinate_rates(config);
    const Vector sigma = coordinate_sigma(config);
    const Matrix b = fourier_observation_matrix(config.partition, config.modes);
    const double delta = config.delta;
    const auto c = rates.size();
    Vector v = Vector::Zero(c);
    Vector e = Vector::Zero(c);
    Vector innov = Vector::Zero(c);
    for (Eigen::Index j = 0; j < c; ++j) {
        if (sigma(j) == 0.0) {
            continue;
        }
        if (!(rates(j) > 0.0)) {
            throw Error(fmt::format("coordinate {} has volatility but no mean reversion; the process is not stationary",
                                    j));
        }
        v(j) = sigma(j) * sigma(j) / (2.0 * rates(j));
        e(j) = std::exp(-rates(j) * delta);
        innov(j) = ou_step_variance(rates(j), sigma(j), delta);
    }
    PopulationMoments p;
    p.gamma = b * v.asDiagonal() * b.transpose();
    p.cross = b * (e.cwiseProduct(v)).asDiagonal() * b.transpose();
    Eigen::LDLT<Matrix> ldlt(p.gamma);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(p.gamma, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff())) {
        throw Error("population Gram matrix is singular: the partition does not resolve the active modes");
    }
    p.predictor = ldlt.solve(p.cross.transpose()).transpose();
    const Matrix sgs = p.predictor * p.gamma * p.predictor.transpose();
    p.adjusted_target = (p.gamma - sgs) / delta;
    p.adjusted_target = (0.5 * (p.adjusted_target + p.adjusted_target.transpose())).eval();
    const Vector em1 = e.array() - 1.0;
    p.propagation_target = b * (em1.cwiseProduct(em1).cwiseProduct(v)).asDiagonal() * b.transpose() / delta;
    p.innovation_target = b * innov.asDiagonal() * b.transpose() / delta;
    return p;
}

Matrix population_predictor(const SimConfig& config) {
    return population_moments(config).predictor;
}

OuPath simulate_ou_1d(double lambda, const Vector& sigma, double delta, std::size_t n, std::uint64_t seed,
                      std::optional<double> x0) {
    if (n < 2) {
        throw Error("OU simulation needs at least two points");
    }
    if (!(delta > 0.0)) {
        throw Error("delta must be positive");
    }
    if (sigma.size() != 1 && static_cast<std::size_t>(sigma.size()) != n - 1) {
        throw Error(fmt::format("sigma needs 1 or {} entries, got {}", n - 1, sigma.size()));
    }
    auto sigma_at = [&](std::size_t t) { return sigma.size() == 1 ? sigma(0) : sigma(static_cast<Eigen::Index>(t)); };
    const double rate = -lambda;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    OuPath out;
    out.ar_coefficient = std::exp(lambda * delta);
    out.stationary_variance = lambda < 0.0 ? sigma_at(0) * sigma_at(0) / (2.0 * rate)
                                           : std::numeric_limits<double>::infinity();
    out.x.resize(static_cast<Eigen::Index>(n));
    if (x0) {
        out.x(0) = *x0;
    } else if (lambda < 0.0) {
        out.x(0) = std::sqrt(out.stationary_variance) * normal(rng);
    } else {
        out.x(0) = 0.0;
    }
    double adjusted = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double var = ou_step_variance(rate, sigma_at(t - 1), delta);
        adjusted += var;
        out.x(static_cast<Eigen::Index>(t)) =
            out.ar_coefficient * out.x(static_cast<Eigen::Index>(t - 1)) + std::sqrt(var) * normal(rng);
    }
    out.adjusted_target = adjusted / (delta * static_cast<double>(n - 1));
    out.propagation_target = lambda < 0.0
        ? (out.ar_coefficient - 1.0) * (out.ar_coefficient - 1.0) * out.stationary_variance / delta
        : 0.0;
    return out;
}

} // namespace elvol

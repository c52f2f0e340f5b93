#pragma once

#include "elvol/calendar.hpp"
#include "elvol/common.hpp"
#include "elvol/panel.hpp"
#include "elvol/partition.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace elvol {

enum class VolModel {
    Constant,  // sigma_k fixed
    Piecewise, // sigma_k times a factor that changes at given days
    Stochastic // sigma_k times sqrt(v_t), v a square-root (CIR) factor
};

/// Volatility multiplier `factor` applies from `start_day` (0-based) until the next segment.
struct VolSegment {
    std::size_t start_day = 0;
    double factor = 1.0;
};

/// dv = theta (1 - v) dt + xi sqrt(v) dW, discretized with full truncation on substeps.
struct SqrtFactor {
    double theta = 50.0;
    double xi = 1.0;
    double v0 = 1.0;
};

/// Deterministic mean path added to every local average: level + trend * n + weekly[weekday].
struct DriftSpec {
    double level = 0.0;
    double trend_per_day = 0.0;
    std::array<double, 7> weekly{}; // Monday first
};

/// Heat equation on the circle in the real Fourier basis {1, cos kh, sin kh},
/// k = 1..modes. Coordinate k decays at rate kappa k^2 (per year); the constant
/// mode decays at -zero_mode_lambda (0 gives a random walk).
struct SimConfig {
    std::size_t modes = 3;
    double kappa = 80.0;
    double zero_mode_lambda = 0.0;
    std::vector<double> mode_sigma{1.0, 1.0, 1.0, 1.0}; // modes + 1 entries, shared by cos and sin
    VolModel vol_model = VolModel::Constant;
    std::vector<VolSegment> vol_segments;
    SqrtFactor sqrt_factor;
    DriftSpec drift;
    std::size_t days = 1000;
    std::size_t substeps = 1;
    double delta = kDailyDelta;
    std::uint64_t seed = 1;
    DeliveryPartition partition = DeliveryPartition::uniform(24);
    Date start = Date{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{1}};
    /// Start from the stationary law of every mean-reverting coordinate (others start at 0).
    bool stationary_start = true;
    /// Overrides the initial coordinates when set (length 2 modes + 1).
    std::optional<Vector> initial_state;

    std::size_t coordinates() const { return 2 * modes + 1; }
    void validate() const;
};

struct SimTruth {
    PricePanel panel;
    Matrix state;          // days x coordinates
    Matrix observation;    // d x coordinates, bin averages of the basis functions
    Vector rates;          // per coordinate, per year
    Vector sigma;          // per coordinate base volatility
    Matrix innovation_var; // days x coordinates: variance injected over (n-1, n], propagated to n
    Matrix mean_path;      // days x d
    SimConfig config;
};

/// Bin averages of the basis functions: d x (2 modes + 1).
Matrix fourier_observation_matrix(const DeliveryPartition& partition, std::size_t modes);

/// Per-coordinate rates: -zero_mode_lambda, then kappa k^2 for cos and sin of mode k.
Vector coordinate_rates(const SimConfig& config);
Vector coordinate_sigma(const SimConfig& config);

SimTruth simulate_heat_spde(const SimConfig& config);

/// Annualized semigroup-weighted integrated covariance over the `window`
/// days ending at row `end_row` (inclusive):
/// (1 / (delta w)) A [sum of propagated innovation variances] A^T.
Matrix true_semigroup_weighted_iv(const SimTruth& truth, std::size_t end_row, std::size_t window);

/// Stationary moments of a constant-volatility configuration. Coordinates with
/// zero volatility are excluded; a nonzero volatility on a coordinate that
/// does not mean-revert is an error.
struct PopulationMoments {
    Matrix gamma; // E[X_0 X_0^T]
    Matrix cross; // E[X_1 X_0^T]
    Matrix predictor;
    Matrix adjusted_target;    // (1/delta)(Gamma - S Gamma S^T)
    Matrix propagation_target; // (1/delta) A (E - I) V (E - I) A^T
    Matrix innovation_target;  // (1/delta) A diag(sigma^2 (1 - e^{-2 r delta}) / (2 r)) A^T
};

PopulationMoments population_moments(const SimConfig& config);
Matrix population_predictor(const SimConfig& config);

struct OuPath {
    Vector x;
    double ar_coefficient = 0.0;     // e^{lambda delta}
    double stationary_variance = 0.0;
    double propagation_target = 0.0; // (1/delta)(e^{lambda delta} - 1)^2 E[X_0^2]
    double adjusted_target = 0.0;    // (1/delta) mean over days of int_0^delta e^{2 lambda (delta - t)} sigma^2 dt
};

/// Exact discretization of dX = lambda X dt + sigma_t dW with sigma constant
/// within each day. `sigma` holds one value (constant) or n - 1 daily values.
/// Starts from the stationary law when lambda < 0 and x0 is not given.
OuPath simulate_ou_1d(double lambda, const Vector& sigma, double delta, std::size_t n, std::uint64_t seed,
                      std::optional<double> x0 = std::nullopt);

/// Variance of int_0^dt e^{-r (dt - u)} sigma dW_u.
double ou_step_variance(double rate, double sigma, double dt);

} // namespace elvol

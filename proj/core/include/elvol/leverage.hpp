#pragma once

#include "elvol/regression.hpp"

#include <cstddef>
#include <vector>

namespace elvol {

/// Control specifications of the news-impact regressions.
/// 1: none. 2: asinh of the lagged price level. 3: lagged log level factor
/// score (mean reversion). 4: both.
enum class NicSpec { NoControls = 1, PriceLevel = 2, MeanReversion = 3, Joint = 4 };

/// Control matrix for a spec from the two candidate series (aligned with the response).
Matrix nic_controls(NicSpec spec, const Vector& asinh_lagged_price, const Vector& log_lagged_score);

/// Bin index per observation for `bins` equal-frequency bins. Ties keep
/// observation order, so bin sizes differ by at most one.
std::vector<std::size_t> equal_frequency_bins(const Vector& x, std::size_t bins);

struct NicCurve {
    NicSpec spec = NicSpec::NoControls;
    Vector edges;   // bins + 1 entries: bin minima, then the overall maximum
    Vector centers; // mean driver value per bin
    Vector counts;
    Vector mu;
    Vector se;
    Vector lo; // mu -/+ 1.96 se
    Vector hi;
    RegressionReport bin_regression;
    RegressionReport piecewise; // const, beta_plus (max(x,0)), beta_minus (min(x,0))
    WaldResult wald;            // beta_plus = beta_minus

    double beta_plus() const { return piecewise.coef(1); }
    double beta_minus() const { return piecewise.coef(2); }
};

/// Residualizes response and driver on [1, controls] (when controls has
/// columns), bins the driver, and estimates the bin means and the piecewise
/// linear fit with Newey-West covariances.
NicCurve binned_nic(const Vector& response, const Vector& driver, const Matrix& controls,
                    NicSpec spec = NicSpec::NoControls, std::size_t bins = 20, std::size_t hac_lags = 14);

struct LeverageCurves {
    Vector beta_plus;
    Vector beta_minus;
    Vector se_plus;
    Vector se_minus;
    Vector wald_p;
    std::vector<bool> asymmetric; // Wald rejects beta_plus = beta_minus at 5%
    bool conditional = false;
};

/// Per delivery period h: IV^(h) = b0 + b+ max(x,0) + b- min(x,0) (+ controls_h) with HAC
/// covariance. `controls` is empty (unconditional) or holds one matrix per period.
LeverageCurves functional_leverage_curves(const Matrix& iv, const Vector& driver,
                                          const std::vector<Matrix>& controls = {}, std::size_t hac_lags = 14);

} // namespace elvol

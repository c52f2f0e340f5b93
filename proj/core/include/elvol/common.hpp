#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace elvol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised for invalid inputs and numerically infeasible requests.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Year fraction of one daily step, the default annualization.
inline constexpr double kDailyDelta = 1.0 / 365.0;

} // namespace elvol

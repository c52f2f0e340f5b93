#pragma once

#include "elvol/calendar.hpp"
#include "elvol/common.hpp"
#include "elvol/rcv.hpp"

#include <cstddef>
#include <vector>

namespace elvol {

/// M = Q diag(lambda) Q^T with lambda descending. Every column of Q has a
/// positive entry sum (ties: its largest-magnitude entry is positive).
struct FactorDecomposition {
    Vector eigenvalues;
    Matrix directions; // columns q_k
    Matrix loadings;   // columns sqrt(lambda_k) q_k
    Vector explained;  // lambda_k / sum lambda

    std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
    Matrix reconstruct() const;
};

/// Throws when M is asymmetric beyond rounding or has an eigenvalue below
/// -1e-10 * trace. Smaller negatives and values within 1e-12 * trace of zero
/// become exactly 0.
FactorDecomposition eigendecompose(const Matrix& m);

/// Flips each column so that its entry sum is positive.
void orient_by_sum(Matrix& directions);

struct ScoreSeries {
    std::vector<Date> dates;
    Matrix x;      // observation vectors, one row per date
    Matrix scores; // S_k(t) = q_k^T x_t, one column per retained component
};

/// Scores of the first `components` factors (all when 0).
ScoreSeries factor_scores(const FactorDecomposition& decomp, const Matrix& x, std::vector<Date> dates = {},
                          std::size_t components = 0);

/// Default observation vectors: the diagonals of the RCV matrices.
Matrix rcv_diagonals(const RcvSeries& series);

/// Per-window loadings, one surface (windows x d) per component.
struct LoadingSurfaces {
    std::vector<Date> dates;
    std::vector<Matrix> surfaces;
    Matrix eigenvalues; // windows x components
};

/// Chain alignment: the first row keeps a nonnegative entry sum, every later
/// row is flipped when its inner product with its predecessor is negative.
void align_signs(Matrix& surface);

LoadingSurfaces rolling_loadings(const RcvSeries& series, std::size_t components);

/// Smallest k whose cumulative explained share reaches `threshold`.
std::size_t variance_explained_count(const FactorDecomposition& decomp, double threshold);

} // namespace elvol

#include "elvol/factor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace elvol {

Matrix FactorDecomposition::reconstruct() const {
    return directions * eigenvalues.asDiagonal() * directions.transpose();
}

void orient_by_sum(Matrix& directions) {
    for (Eigen::Index k = 0; k < directions.cols(); ++k) {
        auto col = directions.col(k);
        const double sum = col.sum();
        const double scale = col.cwiseAbs().maxCoeff();
        bool flip = sum < 0.0;
        if (std::abs(sum) <= 1e-12 * scale * static_cast<double>(col.size())) {
            Eigen::Index arg = 0;
            col.cwiseAbs().maxCoeff(&arg);
            flip = col(arg) < 0.0;
        }
        if (flip) {
            col = -col;
        }
    }
}

FactorDecomposition eigendecompose(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error("eigendecomposition needs a nonempty square matrix");
    }
    const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * scale) {
        throw Error(fmt::format("matrix is not symmetric (max asymmetry {:.3g})", asym));
    }
    const Matrix sym = 0.5 * (m + m.transpose());
    const double trace = sym.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw Error("eigendecomposition did not converge");
    }
    const Eigen::Index d = sym.rows();
    FactorDecomposition out;
    out.eigenvalues = eig.eigenvalues().reverse();
    out.directions = eig.eigenvectors().rowwise().reverse();
    for (Eigen::Index k = 0; k < d; ++k) {
        double& l = out.eigenvalues(k);
        if (l < -1e-10 * std::abs(trace)) {
            throw Error(fmt::format("matrix is not positive semidefinite (eigenvalue {:.6g}, trace {:.6g})", l, trace));
        }
        if (l < 0.0 || std::abs(l) <= 1e-12 * std::abs(trace)) {
            l = 0.0;
        }
    }
    orient_by_sum(out.directions);
    out.loadings = out.directions * out.eigenvalues.cwiseSqrt().asDiagonal();
    const double total = out.eigenvalues.sum();
    out.explained = total > 0.0 ? Vector(out.eigenvalues / total) : Vector::Zero(d);
    return out;
}

ScoreSeries factor_scores(const FactorDecomposition& decomp, const Matrix& x, std::vector<Date> dates,
                          std::size_t components) {
    const auto d = static_cast<Eigen::Index>(decomp.dim());
    if (x.cols() != d) {
        throw Error(fmt::format("observation vectors have length {}, expected {}", x.cols(), d));
    }
    if (!dates.empty() && dates.size() != static_cast<std::size_t>(x.rows())) {
        throw Error("score dates do not match the observation rows");
    }
    const Eigen::Index k = components == 0 ? d : std::min<Eigen::Index>(static_cast<Eigen::Index>(components), d);
    ScoreSeries out;
    out.dates = std::move(dates);
    out.x = x;
    out.scores = x * decomp.directions.leftCols(k);
    return out;
}

Matrix rcv_diagonals(const RcvSeries& series) {
    Matrix x(static_cast<Eigen::Index>(series.size()), static_cast<Eigen::Index>(series.dim()));
    for (std::size_t j = 0; j < series.size(); ++j) {
        x.row(static_cast<Eigen::Index>(j)) = series.mats[j].diagonal().transpose();
    }
    return x;
}

void align_signs(Matrix& surface) {
    for (Eigen::Index t = 0; t < surface.rows(); ++t) {
        const bool flip = t == 0 ? surface.row(t).sum() < 0.0 : surface.row(t).dot(surface.row(t - 1)) < 0.0;
        if (flip) {
            surface.row(t) = -surface.row(t);
        }
    }
}

LoadingSurfaces rolling_loadings(const RcvSeries& series, std::size_t components) {
    const auto d = static_cast<Eigen::Index>(series.dim());
    const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(components), d);
    const auto windows = static_cast<Eigen::Index>(series.size());
    LoadingSurfaces out;
    out.dates = series.dates;
    out.surfaces.assign(static_cast<std::size_t>(k), Matrix(windows, d));
    out.eigenvalues.resize(windows, k);
    for (Eigen::Index t = 0; t < windows; ++t) {
        const auto decomp = eigendecompose(series.mats[static_cast<std::size_t>(t)]);
        for (Eigen::Index c = 0; c < k; ++c) {
            out.surfaces[static_cast<std::size_t>(c)].row(t) = decomp.loadings.col(c).transpose();
            out.eigenvalues(t, c) = decomp.eigenvalues(c);
        }
    }
    for (auto& s : out.surfaces) {
        align_signs(s);
    }
    return out;
}

std::size_t variance_explained_count(const FactorDecomposition& decomp, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw Error("explained-variance threshold must lie in (0, 1]");
    }
    const double total = decomp.eigenvalues.sum();
    const auto d = decomp.dim();
    if (!(total > 0.0)) {
        return 0;
    }
    // Compare the unexplained remainder, which is exact for equal eigenvalues.
    for (std::size_t k = 1; k <= d; ++k) {
        const double rest = decomp.eigenvalues.tail(static_cast<Eigen::Index>(d - k)).sum();
        if (rest <= (1.0 - threshold) * total) {
            return k;
        }
    }
    return d;
}

} // namespace elvol

#include "elvol/partition.hpp"

#include <fmt/format.h>

#include <cmath>

namespace elvol {

namespace {

constexpr double kAngleTol = 1e-9;

std::vector<std::string> default_labels(std::size_t bins) {
    const std::size_t digits = std::max<std::size_t>(2, fmt::format("{}", bins).size());
    std::vector<std::string> labels;
    labels.reserve(bins);
    for (std::size_t i = 1; i <= bins; ++i) {
        labels.push_back(fmt::format("h{:0{}d}", i, digits));
    }
    return labels;
}

} // namespace

DeliveryPartition DeliveryPartition::uniform(std::size_t bins) {
    if (bins == 0) {
        throw Error("partition needs at least one bin");
    }
    std::vector<double> bp(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        bp[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(bins);
    }
    bp.back() = kTwoPi;
    return DeliveryPartition(std::move(bp), default_labels(bins));
}

DeliveryPartition DeliveryPartition::from_breakpoints(std::vector<double> breakpoints,
                                                      std::vector<std::string> labels) {
    if (breakpoints.size() < 2) {
        throw Error("partition needs at least one bin");
    }
    if (std::abs(breakpoints.front()) > kAngleTol || std::abs(breakpoints.back() - kTwoPi) > kAngleTol) {
        throw Error(fmt::format("partition must span [0, 2pi], got [{}, {}]", breakpoints.front(),
                                breakpoints.back()));
    }
    breakpoints.front() = 0.0;
    breakpoints.back() = kTwoPi;
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1])) {
            throw Error(fmt::format("partition breakpoints must increase strictly (index {})", i));
        }
    }
    const std::size_t bins = breakpoints.size() - 1;
    if (labels.empty()) {
        labels = default_labels(bins);
    } else if (labels.size() != bins) {
        throw Error(fmt::format("partition has {} bins but {} labels", bins, labels.size()));
    }
    return DeliveryPartition(std::move(breakpoints), std::move(labels));
}

std::size_t DeliveryPartition::breakpoint_index(double angle) const {
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (std::abs(breakpoints_[i] - angle) <= kAngleTol) {
            return i;
        }
    }
    return breakpoints_.size();
}

bool DeliveryPartition::refines(const DeliveryPartition& coarse) const {
    for (double h : coarse.breakpoints()) {
        if (breakpoint_index(h) == breakpoints_.size()) {
            return false;
        }
    }
    return true;
}

Vector DeliveryPartition::average_weights() const {
    Vector w(size());
    for (std::size_t i = 0; i < size(); ++i) {
        w[static_cast<Eigen::Index>(i)] = width(i) / kTwoPi;
    }
    return w;
}

bool DeliveryPartition::operator==(const DeliveryPartition& other) const {
    if (size() != other.size()) {
        return false;
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (std::abs(breakpoints_[i] - other.breakpoints_[i]) > kAngleTol) {
            return false;
        }
    }
    return true;
}

ObservationWeights observation_weights(const DeliveryPartition& partition, std::size_t fine_grid_size) {
    const std::size_t d = partition.size();
    if (fine_grid_size < d) {
        throw Error(fmt::format("fine grid of {} cells cannot resolve {} bins", fine_grid_size, d));
    }
    const double cell = kTwoPi / static_cast<double>(fine_grid_size);
    std::vector<std::size_t> node(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
        const double pos = partition.breakpoints()[i] / cell;
        const double rounded = std::round(pos);
        if (std::abs(pos - rounded) > 1e-7) {
            throw Error(fmt::format("breakpoint {} ({} rad) is not on the {}-cell grid", i,
                                    partition.breakpoints()[i], fine_grid_size));
        }
        node[i] = static_cast<std::size_t>(rounded);
    }
    ObservationWeights out;
    out.A = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(fine_grid_size));
    for (std::size_t i = 0; i < d; ++i) {
        const std::size_t cells = node[i + 1] - node[i];
        if (cells == 0) {
            throw Error(fmt::format("bin {} collapses on the {}-cell grid", i, fine_grid_size));
        }
        for (std::size_t c = node[i]; c < node[i + 1]; ++c) {
            out.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = 1.0 / static_cast<double>(cells);
        }
    }
    out.avg_weights = partition.average_weights();
    return out;
}

} // namespace elvol

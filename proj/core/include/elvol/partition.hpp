#pragma once

#include "elvol/common.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace elvol {

/// Ordered breakpoints 0 = h_0 < h_1 < ... < h_d = 2*pi on the circle. Bin i
/// covers [h_{i-1}, h_i) and stands for one delivery period of the day.
class DeliveryPartition {
public:
    /// d equal bins (d = 24 hourly, d = 96 quarter-hourly).
    static DeliveryPartition uniform(std::size_t bins);

    /// Throws elvol::Error unless the breakpoints start at 0, end at 2*pi and
    /// increase strictly. Labels default to h01..hNN.
    static DeliveryPartition from_breakpoints(std::vector<double> breakpoints,
                                              std::vector<std::string> labels = {});

    std::size_t size() const { return breakpoints_.size() - 1; }
    std::span<const double> breakpoints() const { return breakpoints_; }
    const std::vector<std::string>& labels() const { return labels_; }

    double start(std::size_t bin) const { return breakpoints_[bin]; }
    double end(std::size_t bin) const { return breakpoints_[bin + 1]; }
    double width(std::size_t bin) const { return end(bin) - start(bin); }

    /// Index of the breakpoint equal to `angle` (within 1e-9 rad), or size()+1.
    std::size_t breakpoint_index(double angle) const;

    /// True when every breakpoint of `coarse` is also a breakpoint here.
    bool refines(const DeliveryPartition& coarse) const;

    /// Bin widths divided by 2*pi; these weights turn a row of local averages
    /// into the daily average price.
    Vector average_weights() const;

    bool operator==(const DeliveryPartition& other) const;

private:
    DeliveryPartition(std::vector<double> breakpoints, std::vector<std::string> labels)
        : breakpoints_(std::move(breakpoints)), labels_(std::move(labels)) {}

    std::vector<double> breakpoints_;
    std::vector<std::string> labels_;
};

/// Discretization of the local-average functionals g_i on a uniform fine grid.
struct ObservationWeights {
    Matrix A;            // d x fine_grid_size, rows sum to one
    Vector avg_weights;  // length d, proportional to bin widths, sums to one
};

/// Throws elvol::Error when a breakpoint does not fall on a grid node.
ObservationWeights observation_weights(const DeliveryPartition& partition,
                                       std::size_t fine_grid_size = 96);

} // namespace elvol

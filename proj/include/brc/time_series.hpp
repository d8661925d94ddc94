#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace brc {

/// Uniformly sampled multivariate trajectory. Samples are stored as the
/// columns of a d x length matrix so slices feed straight into the readout
/// regression.
class TimeSeries {
public:
    TimeSeries() = default;

    TimeSeries(double dt, double t0, Eigen::MatrixXd samples)
        : dt_(dt), t0_(t0), samples_(std::move(samples)) {
        if (!(dt_ > 0.0)) throw std::invalid_argument("TimeSeries: dt must be positive");
    }

    /// Zero-length series of dimension d (e.g. a closed loop run for 0 steps).
    static TimeSeries empty(std::size_t dimension, double dt, double t0 = 0.0) {
        return TimeSeries(dt, t0, Eigen::MatrixXd(static_cast<Eigen::Index>(dimension), 0));
    }

    double dt() const noexcept { return dt_; }
    double t0() const noexcept { return t0_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(samples_.rows()); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(samples_.cols()); }
    bool empty() const noexcept { return samples_.cols() == 0; }

    double time(std::size_t i) const noexcept { return t0_ + dt_ * static_cast<double>(i); }

    auto sample(std::size_t i) const { return samples_.col(static_cast<Eigen::Index>(i)); }
    auto sample(std::size_t i) { return samples_.col(static_cast<Eigen::Index>(i)); }

    auto component(std::size_t k) const { return samples_.row(static_cast<Eigen::Index>(k)); }

    const Eigen::MatrixXd& samples() const noexcept { return samples_; }
    Eigen::MatrixXd& samples() noexcept { return samples_; }

    TimeSeries slice(std::size_t begin, std::size_t count) const {
        if (begin + count > size())
            throw std::out_of_range("TimeSeries::slice [" + std::to_string(begin) + ", " +
                                    std::to_string(begin + count) + ") exceeds length " +
                                    std::to_string(size()));
        return TimeSeries(dt_, time(begin),
                          samples_.middleCols(static_cast<Eigen::Index>(begin),
                                              static_cast<Eigen::Index>(count)));
    }

    bool operator==(const TimeSeries& other) const {
        return dt_ == other.dt_ && t0_ == other.t0_ && samples_.rows() == other.samples_.rows() &&
               samples_.cols() == other.samples_.cols() && samples_ == other.samples_;
    }

private:
    double dt_ = 1.0;
    double t0_ = 0.0;
    Eigen::MatrixXd samples_;
};

}  // namespace brc

#pragma once

#include <cstdint>
#include <vector>

namespace nashseek {

/// value ~ C * N^exponent from least squares in log-log space.
struct PowerFit {
    double C = 0.0;
    double exponent = 0.0;
    double r2 = 0.0;
};

class ResidualCurve {
public:
    struct Point {
        std::uint64_t N;
        double value;
    };

    /// N must be strictly larger than the previous point's N; value >= 0.
    void add(std::uint64_t N, double value);

    const std::vector<Point>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    double max_value() const;

    /// Fit over points with N > 0 and value > 0. Needs two such points.
    PowerFit fit() const;

    bool strictly_decreasing() const;
    /// Strictly decreasing over the grid and a negative fitted exponent.
    bool looks_class_L() const;
    /// Smallest C with value <= C / N at every point with N > 0.
    double inverse_n_envelope() const;

private:
    std::vector<Point> points_;
};

}  // namespace nashseek

#include "nashseek/residual_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nashseek {

void ResidualCurve::add(std::uint64_t N, double value) {
    if (!points_.empty() && N <= points_.back().N) {
        throw std::invalid_argument("residual curve N values must be strictly increasing");
    }
    if (!(value >= 0.0)) throw std::invalid_argument("residual values must be nonnegative");
    points_.push_back({N, value});
}

double ResidualCurve::max_value() const {
    double v = 0.0;
    for (const auto& p : points_) v = std::max(v, p.value);
    return v;
}

PowerFit ResidualCurve::fit() const {
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& p : points_) {
        if (p.N == 0 || p.value <= 0.0) continue;
        lx.push_back(std::log(static_cast<double>(p.N)));
        ly.push_back(std::log(p.value));
    }
    const auto n = static_cast<double>(lx.size());
    if (lx.size() < 2) throw std::invalid_argument("power fit needs two positive points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("power fit needs distinct N values");
    PowerFit fit;
    fit.exponent = sxy / sxx;
    fit.C = std::exp(my - fit.exponent * mx);
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

bool ResidualCurve::strictly_decreasing() const {
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i].value < points_[i - 1].value)) return false;
    }
    return true;
}

bool ResidualCurve::looks_class_L() const {
    return points_.size() >= 2 && strictly_decreasing() && fit().exponent < 0.0;
}

double ResidualCurve::inverse_n_envelope() const {
    double c = 0.0;
    for (const auto& p : points_) {
        if (p.N == 0) continue;
        c = std::max(c, p.value * static_cast<double>(p.N));
    }
    return c;
}

}  // namespace nashseek

#pragma once

// Shared fixtures for the unit, integration and acceptance tests.

#include "nashseek/async_engine.hpp"
#include "nashseek/game.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace nashseek::testing {

inline std::string source_path(const std::string& rel) {
    return std::string(NASHSEEK_SOURCE_DIR) + "/" + rel;
}

inline std::vector<Eigen::Vector2d> four_agent_sources() {
    return {{-4, -8}, {-12, -3}, {1, 7}, {16, 8}};
}

inline GameDefinition four_agent_game() { return make_connectivity_game(four_agent_sources(), 0.04); }

inline std::vector<double> four_agent_periods() { return {0.01, 0.015, 0.02, 0.01}; }

inline TimerSchedule four_agent_schedule() {
    return build_schedule(four_agent_periods(), {0.0, 0.002, 0.004, 0.006});
}

// Matches the Python oracle solve of the four-agent connectivity game.
inline Vector four_agent_ne() {
    Vector v(8);
    v << -3.4137931034482758, -6.7586206896551726, -10.310344827586206, -2.4482758620689653,
        0.89655172413793105, 6.1724137931034484, 13.827586206896552, 7.0344827586206895;
    return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    return scale * random_matrix(rng, n, 1).col(0);
}

// Strongly monotone affine game: symmetric part Q'Q/m + mu I, plus a skew
// coupling that leaves the diagonal blocks symmetric.
inline GameDefinition random_quadratic_game(std::mt19937_64& rng, std::vector<std::size_t> dims,
                                            double mu = 0.5, double skew = 1.0,
                                            std::vector<ConstraintSet> constraints = {}) {
    std::size_t m = 0;
    for (auto d : dims) m += d;
    const auto n = static_cast<Eigen::Index>(m);
    const Matrix q = random_matrix(rng, n, n);
    Matrix a = q.transpose() * q / static_cast<double>(m) + mu * Matrix::Identity(n, n);
    Matrix k = random_matrix(rng, n, n);
    k = skew * (k - k.transpose()) / 2.0;
    std::size_t off = 0;
    for (auto d : dims) {
        const auto o = static_cast<Eigen::Index>(off);
        const auto dd = static_cast<Eigen::Index>(d);
        k.block(o, o, dd, dd).setZero();
        off += d;
    }
    a += k;
    return make_quadratic_game(std::move(dims), a, random_vector(rng, n), std::move(constraints));
}

inline std::vector<std::size_t> random_dims(std::mt19937_64& rng, std::size_t max_total) {
    std::uniform_int_distribution<std::size_t> agents(1, 4), dim(1, 2);
    std::vector<std::size_t> dims;
    std::size_t total = 0;
    const std::size_t n = agents(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = std::min(dim(rng), max_total - total);
        if (d == 0) break;
        dims.push_back(d);
        total += d;
    }
    return dims;
}

// Draws normalized timer phases until the merged schedule has no collisions.
inline TimerSchedule random_schedule(std::mt19937_64& rng, const std::vector<double>& periods) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> tau(periods.size());
        for (auto& t : tau) t = u(rng);
        try {
            return build_schedule(periods, tau);
        } catch (const std::exception&) {
        }
    }
    throw std::runtime_error("no collision-free phases found");
}

}  // namespace nashseek::testing

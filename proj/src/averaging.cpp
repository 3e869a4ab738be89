#include "nashseek/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nashseek {

namespace {

std::uint64_t max_n(const std::vector<std::uint64_t>& N_list) {
    if (N_list.empty()) throw std::invalid_argument("N list must not be empty");
    for (std::size_t i = 1; i < N_list.size(); ++i) {
        if (N_list[i] <= N_list[i - 1]) {
            throw std::invalid_argument("N list must be strictly increasing");
        }
    }
    if (N_list.front() == 0) throw std::invalid_argument("N values must be >= 1");
    return N_list.back();
}

void check_omega(const SystemPair& pair, const Vector& mu, std::uint64_t k) {
    if (pair.in_omega && !pair.in_omega(mu)) {
        std::ostringstream msg;
        msg << "boundary-layer state left Omega";
        if (!pair.omega_desc.empty()) msg << " (" << pair.omega_desc << ")";
        msg << " at step " << k;
        throw AssumptionViolation(msg.str());
    }
}

double gap(double theta) { return std::abs(std::exp(std::complex<double>(0.0, theta)) - 1.0); }

}  // namespace

std::vector<Vector> boundary_layer_rollout(const SystemPair& pair, const Vector& u_fixed,
                                           const Vector& mu0, std::uint64_t N) {
    std::vector<Vector> traj;
    traj.reserve(N + 1);
    check_omega(pair, mu0, 0);
    traj.push_back(mu0);
    for (std::uint64_t k = 0; k < N; ++k) {
        traj.push_back(pair.M(u_fixed, traj.back()));
        check_omega(pair, traj.back(), k + 1);
    }
    return traj;
}

ResidualCurve averaging_residual(const SystemPair& pair, const Vector& u_fixed,
                                 const Vector& mu0, const std::vector<std::uint64_t>& N_list) {
    const std::uint64_t n_max = max_n(N_list);
    ResidualCurve curve;
    Vector mu = mu0;
    check_omega(pair, mu, 0);
    Vector sum = Vector::Zero(u_fixed.size());
    std::size_t next = 0;
    for (std::uint64_t k = 0; k < n_max; ++k) {
        sum += pair.G(u_fixed, mu) - pair.G_avg(u_fixed, mu);
        mu = pair.M(u_fixed, mu);
        check_omega(pair, mu, k + 1);
        if (k + 1 == N_list[next]) {
            curve.add(N_list[next], sum.norm() / static_cast<double>(k + 1));
            ++next;
        }
    }
    return curve;
}

SineSumConstants sine_sum_constants(const std::vector<double>& phis, double tol) {
    if (phis.empty()) throw std::invalid_argument("sine_sum_constants needs at least one phi");
    constexpr double inf = std::numeric_limits<double>::infinity();
    SineSumConstants out;
    double min_single = inf;
    double min_double = inf;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        const double g1 = gap(phis[i]);
        const double g2 = gap(2.0 * phis[i]);
        if (g1 <= tol) {
            std::ostringstream msg;
            msg << "phi[" << i << "] = " << phis[i] << " is a multiple of 2 pi";
            out.resonances.push_back(msg.str());
        }
        if (g2 <= tol) {
            std::ostringstream msg;
            msg << "2 phi[" << i << "] = " << 2.0 * phis[i] << " is a multiple of 2 pi";
            out.resonances.push_back(msg.str());
        }
        min_single = std::min(min_single, g1);
        min_double = std::min(min_double, g2);
    }
    double min_pair = inf;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        for (std::size_t l = i + 1; l < phis.size(); ++l) {
            for (double comb : {phis[i] + phis[l], phis[i] - phis[l]}) {
                const double g = gap(comb);
                if (g <= tol) {
                    std::ostringstream msg;
                    msg << "phi[" << i << "] and phi[" << l << "] resonate";
                    out.resonances.push_back(msg.str());
                }
                min_pair = std::min(min_pair, g);
            }
        }
    }
    out.c1 = min_single > tol ? 2.0 / min_single : inf;
    out.c2 = out.c1;
    if (phis.size() < 2) {
        out.c3 = 0.0;
    } else {
        out.c3 = min_pair > tol ? 2.0 / min_pair : inf;
    }
    out.c4 = min_double > tol ? 1.0 / min_double : inf;
    return out;
}

ResidualCurve estimator_residual(const GameDefinition& game, const Vector& x_fixed,
                                 const OscillatorBank& bank,
                                 const std::vector<std::uint64_t>& N_list) {
    const std::uint64_t n_max = max_n(N_list);
    const Vector F = pseudogradient(game, x_fixed);
    OscillatorBank b = bank;
    Vector sum = Vector::Zero(x_fixed.size());
    ResidualCurve curve;
    std::size_t next = 0;
    for (std::uint64_t k = 0; k < n_max; ++k) {
        sum += estimate_pseudogradient(game, x_fixed, b);
        b.rotate_in_place();
        if (k + 1 == N_list[next]) {
            const double n = static_cast<double>(k + 1);
            curve.add(N_list[next], (sum / n - F).norm());
            ++next;
        }
    }
    return curve;
}

double estimator_floor(const GameDefinition& game, const Vector& x_fixed,
                       const OscillatorBank& bank, std::uint64_t N) {
    if (N == 0) throw std::invalid_argument("estimator_floor: N must be >= 1");
    OscillatorBank b = bank;
    double total = 0.0;
    constexpr double h = 1e-3;
    for (std::uint64_t k = 0; k < N; ++k) {
        const Vector d = dither_vector(b);
        const Vector step = b.amps().cwiseProduct(d);
        Vector rem(x_fixed.size());
        for (std::size_t i = 0; i < game.agent_count(); ++i) {
            const double j0 = eval_cost(game, i, x_fixed);
            const double jp = eval_cost(game, i, x_fixed + step);
            const double slope =
                (eval_cost(game, i, x_fixed + h * step) - eval_cost(game, i, x_fixed - h * step)) /
                (2.0 * h);
            const auto o = static_cast<Eigen::Index>(game.offset(i));
            const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
            rem.segment(o, n) =
                2.0 * (jp - j0 - slope) * d.segment(o, n).cwiseQuotient(b.amps().segment(o, n));
        }
        total += rem.norm();
        b.rotate_in_place();
    }
    return total / static_cast<double>(N);
}

EstimatorBoundFit fit_estimator_bound(const GameDefinition& game, const Vector& x_fixed,
                                      const Vector& freqs, const std::vector<double>& amplitudes,
                                      const std::vector<std::uint64_t>& N_list) {
    EstimatorBoundFit fit;
    for (double a : amplitudes) {
        OscillatorBank bank(freqs, Vector::Constant(freqs.size(), a));
        const ResidualCurve curve = estimator_residual(game, x_fixed, bank, N_list);
        for (const auto& p : curve.points()) fit.samples.push_back({p.N, a, p.value});
    }
    if (fit.samples.empty()) throw std::invalid_argument("fit_estimator_bound: no samples");

    // Two-variable LP: the optimum sits on a vertex of the feasible region.
    auto feasible = [&](double k1, double k2) {
        if (k1 < 0.0 || k2 < 0.0) return false;
        for (const auto& s : fit.samples) {
            if (k1 / static_cast<double>(s.N) + k2 * s.amplitude < s.residual * (1.0 - 1e-12)) {
                return false;
            }
        }
        return true;
    };
    auto objective = [&](double k1, double k2) {
        double v = 0.0;
        for (const auto& s : fit.samples) v += k1 / static_cast<double>(s.N) + k2 * s.amplitude;
        return v;
    };
    std::vector<std::pair<double, double>> candidates;
    double k1_only = 0.0;
    double k2_only = 0.0;
    for (const auto& s : fit.samples) {
        k1_only = std::max(k1_only, s.residual * static_cast<double>(s.N));
        k2_only = std::max(k2_only, s.residual / s.amplitude);
    }
    candidates.emplace_back(k1_only, 0.0);
    candidates.emplace_back(0.0, k2_only);
    for (std::size_t p = 0; p < fit.samples.size(); ++p) {
        for (std::size_t q = p + 1; q < fit.samples.size(); ++q) {
            const auto& a = fit.samples[p];
            const auto& b = fit.samples[q];
            const double a11 = 1.0 / static_cast<double>(a.N);
            const double a21 = 1.0 / static_cast<double>(b.N);
            const double det = a11 * b.amplitude - a21 * a.amplitude;
            if (std::abs(det) < 1e-300) continue;
            const double k1 = (a.residual * b.amplitude - b.residual * a.amplitude) / det;
            const double k2 = (a11 * b.residual - a21 * a.residual) / det;
            candidates.emplace_back(k1, k2);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [k1, k2] : candidates) {
        if (!feasible(k1, k2)) continue;
        const double obj = objective(k1, k2);
        if (obj < best) {
            best = obj;
            fit.K1 = k1;
            fit.K2 = k2;
        }
    }
    fit.worst_slack = -std::numeric_limits<double>::infinity();
    for (const auto& s : fit.samples) {
        fit.worst_slack = std::max(
            fit.worst_slack, s.residual - (fit.K1 / static_cast<double>(s.N) + fit.K2 * s.amplitude));
    }
    return fit;
}

ResidualCurve filter_residual(const Vector& F, const Vector& xi0, double alpha, double gamma,
                              const std::vector<std::uint64_t>& N_list) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (F.size() != xi0.size()) throw std::invalid_argument("filter residual: size mismatch");
    const std::uint64_t n_max = max_n(N_list);
    ResidualCurve curve;
    Vector xi = xi0;
    Vector sum = Vector::Zero(F.size());
    std::size_t next = 0;
    for (std::uint64_t k = 0; k < n_max; ++k) {
        sum += xi - F;
        xi = (1.0 - alpha) * xi + alpha * F;
        if (k + 1 == N_list[next]) {
            curve.add(N_list[next], gamma * sum.norm() / static_cast<double>(k + 1));
            ++next;
        }
    }
    return curve;
}

ResidualCurve filter_residual(const GameDefinition& game, const Vector& x_fixed,
                              const Vector& xi0, double alpha, double gamma,
                              const std::vector<std::uint64_t>& N_list) {
    return filter_residual(pseudogradient(game, x_fixed), xi0, alpha, gamma, N_list);
}

double filter_residual_bound(const Vector& F, const Vector& xi0, double alpha, double gamma,
                             std::uint64_t N) {
    return gamma * (xi0 - F).norm() / (static_cast<double>(N) * alpha);
}

SigmaFit fit_sigma(const SystemPair& pair, const std::vector<Vector>& u_points, const Vector& mu0,
                   const std::vector<std::uint64_t>& N_list) {
    SigmaFit fit;
    for (const auto& u : u_points) {
        fit.C = std::max(fit.C, averaging_residual(pair, u, mu0, N_list).inverse_n_envelope());
        Vector mu = mu0;
        for (std::uint64_t k = 0; k < N_list.back(); ++k) {
            fit.sigma0 = std::max(fit.sigma0, (pair.G(u, mu) - pair.G_avg(u, mu)).norm());
            mu = pair.M(u, mu);
        }
    }
    return fit;
}

EtaReport eta_rollout(const SystemPair& pair, const Vector& u0, const Vector& mu0,
                      const std::vector<double>& eps_list, const EtaOptions& options) {
    if (eps_list.empty()) throw std::invalid_argument("eta_rollout needs at least one eps");
    EtaReport report;
    report.L_window = options.L_window;
    std::vector<Vector> visited{u0};
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
        const auto steps = static_cast<std::uint64_t>(std::ceil(options.horizon / eps));
        const std::uint64_t sample_every = std::max<std::uint64_t>(1, steps / 8);
        Vector u = u0;
        Vector mu = mu0;
        Vector eta = Vector::Zero(u0.size());
        double sup = 0.0;
        for (std::uint64_t k = 0; k < steps; ++k) {
            const Vector g = pair.G(u, mu);
            const Vector g_avg = pair.G_avg(u, mu);
            eta = (1.0 - eps) * eta + eps * (g_avg - g);
            Vector mu_next = pair.M(u, mu);
            u += eps * g;
            mu = std::move(mu_next);
            sup = std::max(sup, eta.norm());
            if (!u.allFinite()) throw ConvergenceFailure("eta rollout diverged");
            if ((k + 1) % sample_every == 0) visited.push_back(u);
        }
        report.rows.push_back({eps, sup, 0.0});
    }
    report.sigma = fit_sigma(pair, visited, mu0, options.sigma_N_list);
    const auto L = static_cast<double>(options.L_window);
    report.monotone = true;
    report.below_bound = true;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        auto& row = report.rows[i];
        row.bound = (1.0 + row.eps + std::numbers::e) * report.sigma(L) +
                    3.0 * row.eps * L * report.sigma(0.0);
        if (row.sup_norm > row.bound) report.below_bound = false;
        if (i > 0 && report.rows[i - 1].eps > row.eps &&
            row.sup_norm > report.rows[i - 1].sup_norm) {
            report.monotone = false;
        }
    }
    return report;
}

SystemPair dither_example_pair(const Vector& q, const Vector& center, const Vector& freqs,
                               double amplitude, double eps) {
    if (q.size() != center.size() || q.size() != freqs.size()) {
        throw std::invalid_argument("dither example: size mismatch");
    }
    if (!(amplitude > 0.0)) throw std::invalid_argument("dither example: amplitude must be > 0");
    const Eigen::Index m = q.size();
    auto cost = [q, center](const Vector& u) {
        return q.dot((u - center).cwiseAbs2());
    };
    SystemPair pair;
    pair.eps = eps;
    pair.G = [cost, amplitude, m](const Vector& u, const Vector& mu) -> Vector {
        Vector d(m);
        for (Eigen::Index j = 0; j < m; ++j) d(j) = mu(2 * j);
        return -(2.0 / amplitude) * cost(u + amplitude * d) * d;
    };
    pair.G_avg = [q, center](const Vector& u, const Vector&) -> Vector {
        return -2.0 * q.cwiseProduct(u - center);
    };
    pair.M = [freqs, m](const Vector&, const Vector& mu) -> Vector {
        Vector out(2 * m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double c = std::cos(freqs(j));
            const double s = std::sin(freqs(j));
            out(2 * j) = c * mu(2 * j) - s * mu(2 * j + 1);
            out(2 * j + 1) = s * mu(2 * j) + c * mu(2 * j + 1);
        }
        return out;
    };
    pair.in_omega = [m](const Vector& mu) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (std::abs(std::hypot(mu(2 * j), mu(2 * j + 1)) - 1.0) > 1e-6) return false;
        }
        return true;
    };
    pair.omega_desc = "product of unit circles";
    return pair;
}

double lyapunov_value(const LyapunovSpec& spec, const Vector& x) {
    const Vector e = x - spec.center;
    if (spec.weights.size() == 0) return e.squaredNorm();
    return spec.weights.dot(e.cwiseAbs2());
}

LyapunovReport lyapunov_trace(const std::vector<Vector>& trajectory, const LyapunovSpec& spec) {
    if (spec.stride == 0) throw std::invalid_argument("lyapunov stride must be >= 1");
    LyapunovReport rep;
    rep.values.reserve(trajectory.size());
    for (const auto& x : trajectory) rep.values.push_back(lyapunov_value(spec, x));
    for (std::size_t t = spec.burn_in; t + spec.stride < trajectory.size(); t += spec.stride) {
        if ((trajectory[t] - spec.center).norm() < spec.rho) continue;
        ++rep.judged;
        const double v0 = rep.values[t];
        const double v1 = rep.values[t + spec.stride];
        if (v1 > v0 * (1.0 + spec.rel_tol) + spec.abs_tol) rep.violations.push_back(t);
    }
    return rep;
}

AsyncSineSumReport async_sine_sum_check(const TimerSchedule& schedule, double omega1,
                                        double omega2, std::size_t i, std::size_t j,
                                        const std::vector<std::uint64_t>& l_list, double tol) {
    const std::uint64_t l_max = max_n(l_list);
    const auto ri = schedule.jumps_per_epoch.at(i);
    const auto rj = schedule.jumps_per_epoch.at(j);
    const double phase = omega1 * static_cast<double>(ri) + omega2 * static_cast<double>(rj);
    AsyncSineSumReport rep;
    rep.resonant = distance_to_2pi_lattice(phase) <= tol;
    if (!rep.resonant) rep.bound = 2.0 * static_cast<double>(ri) / gap(phase);
    std::complex<double> sum = 0.0;
    std::size_t next = 0;
    for (std::uint64_t v = 1; v <= ri * l_max; ++v) {
        const auto kj = static_cast<double>(cross_agent_counter(schedule, v, i, j));
        sum += std::exp(std::complex<double>(0.0, omega1 * static_cast<double>(v) + omega2 * kj));
        if (v == ri * l_list[next]) {
            rep.curve.add(l_list[next], std::abs(sum));
            ++next;
        }
    }
    rep.within_bound = !rep.resonant && rep.curve.max_value() <= rep.bound * (1.0 + 1e-9);
    rep.per_term_last = rep.curve.points().back().value / static_cast<double>(ri * l_max);
    return rep;
}

}  // namespace nashseek

#include "nashseek/async_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nashseek {

namespace {

struct Fraction {
    std::uint64_t num;
    std::uint64_t den;
};

// Last continued-fraction convergent of x whose denominator fits the cap.
Fraction best_convergent(double x, std::uint64_t max_den, double tol) {
    std::uint64_t h_prev = 1, h = static_cast<std::uint64_t>(std::floor(x));
    std::uint64_t k_prev = 0, k = 1;
    double rest = x - std::floor(x);
    for (int iter = 0; iter < 64; ++iter) {
        if (std::abs(static_cast<double>(h) / static_cast<double>(k) - x) <= tol * x) break;
        if (rest < 1e-15) break;
        const double inv = 1.0 / rest;
        const auto a = static_cast<std::uint64_t>(std::floor(inv));
        rest = inv - std::floor(inv);
        const std::uint64_t h_next = a * h + h_prev;
        const std::uint64_t k_next = a * k + k_prev;
        if (k_next > max_den) break;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
    }
    return {h, k};
}

}  // namespace

std::vector<std::uint64_t> ratio_to_integers(const std::vector<double>& periods, double tol,
                                             std::uint64_t max_denominator) {
    if (periods.empty()) throw std::invalid_argument("ratio_to_integers: no periods");
    for (double t : periods) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw std::invalid_argument("sampling periods must be positive and finite");
        }
    }
    // Express every period relative to the smallest one so that ratios are >= 1.
    const double base = *std::min_element(periods.begin(), periods.end());
    std::vector<Fraction> fr;
    std::uint64_t den_lcm = 1;
    for (double t : periods) {
        const double x = t / base;
        Fraction f = best_convergent(x, max_denominator, tol);
        if (f.num == 0 ||
            std::abs(static_cast<double>(f.num) / static_cast<double>(f.den) - x) > tol * x) {
            std::ostringstream msg;
            msg << "period ratio " << x << " has no rational fit with denominator <= "
                << max_denominator << " (periods are not commensurate)";
            throw AssumptionViolation(msg.str());
        }
        den_lcm = std::lcm(den_lcm, f.den);
        fr.push_back(f);
    }
    std::vector<std::uint64_t> p;
    std::uint64_t g = 0;
    for (const auto& f : fr) {
        p.push_back(f.num * (den_lcm / f.den));
        g = std::gcd(g, p.back());
    }
    for (auto& v : p) v /= g;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        for (std::size_t j = 0; j < periods.size(); ++j) {
            const double want = periods[i] / periods[j];
            const double got = static_cast<double>(p[i]) / static_cast<double>(p[j]);
            if (std::abs(got - want) > 10.0 * tol * want) {
                throw AssumptionViolation("integer ratio fit is inconsistent across agents");
            }
        }
    }
    return p;
}

double TimerSchedule::time_at(std::uint64_t k) const {
    return events[k % epoch_length].time + static_cast<double>(k / epoch_length) * period;
}

std::uint64_t TimerSchedule::r_max() const {
    return *std::max_element(jumps_per_epoch.begin(), jumps_per_epoch.end());
}

std::uint64_t TimerSchedule::r_min() const {
    return *std::min_element(jumps_per_epoch.begin(), jumps_per_epoch.end());
}

TimerSchedule build_schedule(const std::vector<double>& periods, const std::vector<double>& tau0) {
    if (tau0.size() != periods.size()) {
        throw std::invalid_argument("one timer phase per agent is required");
    }
    for (double t : tau0) {
        if (!(t >= 0.0 && t < 1.0)) throw std::invalid_argument("timer phases must lie in [0, 1)");
    }
    TimerSchedule s;
    s.periods = periods;
    s.tau0 = tau0;
    s.ratios = ratio_to_integers(periods);
    s.lcm_p = 1;
    for (auto p : s.ratios) s.lcm_p = std::lcm(s.lcm_p, p);
    for (auto p : s.ratios) s.jumps_per_epoch.push_back(s.lcm_p / p);
    s.epoch_length = std::accumulate(s.jumps_per_epoch.begin(), s.jumps_per_epoch.end(),
                                     std::uint64_t{0});
    const double unit = periods[0] / static_cast<double>(s.ratios[0]);
    s.period = unit * static_cast<double>(s.lcm_p);

    // Jump instants in units of T_i / p_i, all inside (0, p].
    struct Instant {
        double u;
        std::size_t agent;
    };
    std::vector<Instant> instants;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto pi = static_cast<double>(s.ratios[i]);
        for (std::uint64_t kk = 0; kk < s.jumps_per_epoch[i]; ++kk) {
            instants.push_back({(static_cast<double>(kk) + 1.0 - tau0[i]) * pi, i});
        }
    }
    std::sort(instants.begin(), instants.end(), [](const Instant& a, const Instant& b) {
        return a.u < b.u || (a.u == b.u && a.agent < b.agent);
    });
    constexpr double collision_tol = 1e-9;
    const auto p_units = static_cast<double>(s.lcm_p);
    for (std::size_t e = 0; e < instants.size(); ++e) {
        const Instant& a = instants[e];
        const Instant& b = instants[(e + 1) % instants.size()];
        if (instants.size() < 2) break;
        const double gap = e + 1 < instants.size() ? b.u - a.u : b.u + p_units - a.u;
        if (gap < collision_tol) {
            std::ostringstream msg;
            msg << "agents " << a.agent << " and " << b.agent
                << " jump simultaneously for this tau0; choose different timer phases";
            throw std::invalid_argument(msg.str());
        }
    }
    for (const auto& in : instants) s.events.push_back({in.agent, in.u * unit});

    std::vector<std::uint64_t> count(periods.size(), 0);
    for (const auto& ev : s.events) ++count[ev.agent];
    if (s.events.size() != s.epoch_length || count != s.jumps_per_epoch) {
        throw std::logic_error("schedule does not contain r_i jumps per agent");
    }
    return s;
}

SelectionMatrices selection_for_agents(const GameDefinition& game, const std::vector<bool>& jumping) {
    if (jumping.size() != game.agent_count()) {
        throw std::invalid_argument("one selection flag per agent is required");
    }
    const auto m = static_cast<Eigen::Index>(game.dim());
    SelectionMatrices sel{Vector::Zero(m), Vector::Zero(static_cast<Eigen::Index>(jumping.size())),
                          Vector::Zero(2 * m)};
    for (std::size_t i = 0; i < jumping.size(); ++i) {
        if (!jumping[i]) continue;
        sel.stau(static_cast<Eigen::Index>(i)) = 1.0;
        const auto o = static_cast<Eigen::Index>(game.offset(i));
        const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
        sel.sx.segment(o, n).setOnes();
        sel.smu.segment(2 * o, 2 * n).setOnes();
    }
    return sel;
}

SelectionMatrices selection_at(const TimerSchedule& schedule, const GameDefinition& game,
                               std::uint64_t k) {
    if (schedule.agent_count() != game.agent_count()) {
        throw std::invalid_argument("schedule and game disagree on the number of agents");
    }
    std::vector<bool> jumping(game.agent_count(), false);
    jumping[schedule.agent_at(k)] = true;
    return selection_for_agents(game, jumping);
}

Vector async_fi_step(const GameDefinition& game, const Vector& x, const TimerSchedule& schedule,
                     std::uint64_t k, double alpha) {
    const std::size_t i = schedule.agent_at(k);
    const auto o = static_cast<Eigen::Index>(game.offset(i));
    const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
    Vector next = x;
    next.segment(o, n) = x.segment(o, n) - alpha * partial_gradient(game, i, x);
    return next;
}

Vector async_fi_step(const GameDefinition& game, const Vector& x, const SelectionMatrices& sel,
                     double alpha) {
    Vector next = x;
    for (std::size_t i = 0; i < game.agent_count(); ++i) {
        if (sel.stau(static_cast<Eigen::Index>(i)) == 0.0) continue;
        const auto o = static_cast<Eigen::Index>(game.offset(i));
        const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
        next.segment(o, n) = x.segment(o, n) - alpha * partial_gradient(game, i, x);
    }
    return next;
}

AsyncState make_async_state(const GameDefinition& game, Vector x0, OscillatorBank bank) {
    if (static_cast<std::size_t>(x0.size()) != game.dim()) {
        throw std::invalid_argument("initial point dimension does not match game");
    }
    if (bank.size() != game.dim()) {
        throw std::invalid_argument("oscillator bank size does not match game dimension");
    }
    Vector xi = Vector::Zero(x0.size());
    return AsyncState{std::move(x0), std::move(xi), std::move(bank),
                      std::vector<std::uint64_t>(game.agent_count(), 0), 0, 0.0};
}

namespace {

void zo_update_agent(const GameDefinition& game, const AsyncState& state, AsyncState& next,
                     std::size_t i, const SyncZOParams& params, GradientSource source) {
    const auto o = static_cast<Eigen::Index>(game.offset(i));
    const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
    const double ab = params.alpha * params.beta;
    if (source == GradientSource::oracle) {
        const Vector g = partial_gradient(game, i, state.x);
        next.xi.segment(o, n) = g;
        next.x.segment(o, n) = state.x.segment(o, n) - ab * g;
    } else {
        const Vector est = estimate_agent_block(game, i, state.x, state.bank);
        next.x.segment(o, n) = state.x.segment(o, n) - ab * state.xi.segment(o, n);
        next.xi.segment(o, n) =
            state.xi.segment(o, n) + params.alpha * (est - state.xi.segment(o, n));
    }
    ++next.kappa[i];
}

}  // namespace

AsyncState async_zo_step(const GameDefinition& game, const AsyncState& state,
                         const TimerSchedule& schedule, const SyncZOParams& params,
                         GradientSource source) {
    params.validate();
    const std::size_t i = schedule.agent_at(state.k);
    AsyncState next = state;
    zo_update_agent(game, state, next, i, params, source);
    Vector mask = Vector::Zero(static_cast<Eigen::Index>(game.dim()));
    mask.segment(static_cast<Eigen::Index>(game.offset(i)),
                 static_cast<Eigen::Index>(game.agent_dim(i)))
        .setOnes();
    next.bank.rotate_in_place(mask);
    next.t = schedule.time_at(state.k);
    ++next.k;
    return next;
}

AsyncState async_zo_step(const GameDefinition& game, const AsyncState& state,
                         const SelectionMatrices& sel, const SyncZOParams& params,
                         GradientSource source) {
    params.validate();
    AsyncState next = state;
    bool any = false;
    for (std::size_t i = 0; i < game.agent_count(); ++i) {
        if (sel.stau(static_cast<Eigen::Index>(i)) == 0.0) continue;
        any = true;
        zo_update_agent(game, state, next, i, params, source);
    }
    if (any) next.bank.rotate_in_place(sel.sx);
    ++next.k;
    return next;
}

Vector gamma_weights(const GameDefinition& game, const TimerSchedule& schedule) {
    if (schedule.agent_count() != game.agent_count()) {
        throw std::invalid_argument("schedule and game disagree on the number of agents");
    }
    Vector w(static_cast<Eigen::Index>(game.dim()));
    for (std::size_t l = 0; l < game.dim(); ++l) {
        w(static_cast<Eigen::Index>(l)) =
            static_cast<double>(schedule.jumps_per_epoch[game.owner(l)]);
    }
    return w;
}

double gamma_weighted_sq_norm(const GameDefinition& game, const TimerSchedule& schedule,
                              const Vector& v) {
    return v.cwiseAbs2().cwiseQuotient(gamma_weights(game, schedule)).sum();
}

EpochOperators epoch_operators(const GameDefinition& game, const TimerSchedule& schedule,
                               double alpha) {
    if (!game.unconstrained()) {
        throw std::invalid_argument("epoch operators are defined for unconstrained games");
    }
    const Vector w = gamma_weights(game, schedule);
    EpochOperators ops;
    ops.T = [game, w, alpha](const Vector& x) -> Vector {
        return x - alpha * w.cwiseProduct(pseudogradient(game, x));
    };
    ops.E = [game, schedule, alpha](const Vector& x) -> Vector {
        Vector y = x;
        for (std::uint64_t k = 0; k < schedule.epoch_length; ++k) {
            y = async_fi_step(game, y, schedule, k, alpha);
        }
        return y;
    };
    ops.R = [T = ops.T, E = ops.E, alpha](const Vector& x) -> Vector {
        return (T(x) - E(x)) / alpha;
    };
    return ops;
}

double stepsize_condition(double alpha, double eta, double mu_f, double lip_L, std::uint64_t r,
                          std::uint64_t r_max) {
    const double rr = static_cast<double>(r);
    const double rb = static_cast<double>(r_max);
    const double coupling = alpha * lip_L * rr * rb * std::pow(1.0 + alpha * lip_L, rr);
    return 0.5 + rb * eta / (mu_f * mu_f) -
           (1.0 - alpha * eta) * (1.0 - alpha - coupling * coupling / (2.0 * eta));
}

namespace {

// Best eta on the scan grid for this alpha, or a negative value if infeasible.
double feasible_eta(double alpha, double mu_f, double lip_L, std::uint64_t r,
                    std::uint64_t r_max) {
    constexpr int grid = 200;
    double best_eta = -1.0;
    double best_lhs = 0.0;
    for (int g = 0; g < grid; ++g) {
        const double eta = std::pow(10.0, -4.0 + 5.0 * g / (grid - 1));
        if (alpha > eta / 10.0) continue;
        const double lhs = stepsize_condition(alpha, eta, mu_f, lip_L, r, r_max);
        if (lhs <= 0.0 && (best_eta < 0.0 || lhs < best_lhs)) {
            best_eta = eta;
            best_lhs = lhs;
        }
    }
    return best_eta;
}

}  // namespace

StepsizeBound max_stepsize(double mu_f, double lip_L, const TimerSchedule& schedule) {
    if (!(mu_f > 0.0) || !(lip_L > 0.0)) {
        throw std::invalid_argument("max_stepsize needs positive constants");
    }
    const std::uint64_t r = schedule.epoch_length;
    const std::uint64_t rb = schedule.r_max();
    auto feasible = [&](double a) { return feasible_eta(a, mu_f, lip_L, r, rb) > 0.0; };

    double lo = 1e-7;
    while (!feasible(lo)) {
        lo /= 2.0;
        if (lo < 1e-15) {
            throw AssumptionViolation("no step size satisfies the epoch condition");
        }
    }
    double hi = lo;
    while (feasible(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1.0) break;
    }
    while ((hi - lo) / hi > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return {lo, feasible_eta(lo, mu_f, lip_L, r, rb)};
}

double epoch_contraction_factor(double alpha, double mu_f, const TimerSchedule& schedule) {
    const auto rl = static_cast<double>(schedule.r_min());
    return 1.0 - alpha * mu_f * mu_f * rl * rl / 2.0;
}

ContractionReport epoch_contraction_check(const GameDefinition& game,
                                          const TimerSchedule& schedule, double alpha,
                                          const Vector& x0, std::size_t epochs) {
    const Vector xs = solve_ne_oracle(game);
    ContractionReport rep;
    rep.factor = epoch_contraction_factor(alpha, game.mu_f(), schedule);
    Vector x = x0;
    double v = gamma_weighted_sq_norm(game, schedule, x - xs);
    rep.curve.add(0, v);
    // epochs that start at the roundoff floor are not judged
    const double floor = std::max(1e-24, 1e-16 * v);
    for (std::size_t n = 0; n < epochs; ++n) {
        for (std::uint64_t k = 0; k < schedule.epoch_length; ++k) {
            x = async_fi_step(game, x, schedule, k, alpha);
        }
        const double v_next = gamma_weighted_sq_norm(game, schedule, x - xs);
        rep.curve.add(n + 1, v_next);
        if (v > floor) {
            const double ratio = v_next / v;
            rep.worst_ratio = std::max(rep.worst_ratio, ratio);
            if (ratio > rep.factor * (1.0 + 1e-12)) rep.violations.push_back(n);
        } else if (v_next > floor) {
            rep.violations.push_back(n);
        }
        v = v_next;
    }
    return rep;
}

UgesReport uges_trajectory_check(const GameDefinition& game, const TimerSchedule& schedule,
                                 double alpha, const Vector& x0, std::uint64_t jumps) {
    const Vector xs = solve_ne_oracle(game);
    const auto r = static_cast<double>(schedule.epoch_length);
    const auto rb = static_cast<double>(schedule.r_max());
    const auto rl = static_cast<double>(schedule.r_min());
    const double growth = std::pow(1.0 + alpha * game.lip_L() * rb / rl, 2.0 * r);
    const double factor = epoch_contraction_factor(alpha, game.mu_f(), schedule);
    Vector x = x0;
    const double v0 = gamma_weighted_sq_norm(game, schedule, x - xs);
    const double floor = std::max(1e-24, 1e-16 * v0);
    UgesReport rep;
    for (std::uint64_t k = 0; k <= jumps; ++k) {
        if (k > 0) x = async_fi_step(game, x, schedule, k - 1, alpha);
        const double v = gamma_weighted_sq_norm(game, schedule, x - xs);
        if (v <= floor) continue;
        const double epochs = std::floor(static_cast<double>(k) / r);
        const double bound = growth * std::pow(factor, epochs - 1.0) * v0;
        const double ratio = bound > 0.0 ? v / bound : (v > 0.0 ? INFINITY : 0.0);
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_jump = k;
        }
    }
    return rep;
}

std::vector<std::uint64_t> coordinate_epoch_counts(const GameDefinition& game,
                                                   const TimerSchedule& schedule) {
    std::vector<std::uint64_t> out;
    for (std::size_t l = 0; l < game.dim(); ++l) {
        out.push_back(schedule.jumps_per_epoch.at(game.owner(l)));
    }
    return out;
}

FrequencyReport validate_frequencies_async(const Vector& freqs,
                                           const std::vector<std::uint64_t>& coordinate_r,
                                           double tol) {
    if (coordinate_r.size() != static_cast<std::size_t>(freqs.size())) {
        throw std::invalid_argument("one epoch count per frequency is required");
    }
    FrequencyReport report;
    const std::size_t m = coordinate_r.size();
    for (std::size_t a = 0; a < m; ++a) {
        const double wa = freqs(static_cast<Eigen::Index>(a));
        if (double d = distance_to_2pi_lattice(wa); d <= tol) {
            report.violations.push_back({a, a, Resonance::Kind::single, d});
        }
        if (double d = distance_to_2pi_lattice(2.0 * wa); d <= tol) {
            report.violations.push_back({a, a, Resonance::Kind::doubled, d});
        }
        const double ra = wa * static_cast<double>(coordinate_r[a]);
        for (std::size_t b = a + 1; b < m; ++b) {
            const double rb = freqs(static_cast<Eigen::Index>(b)) * static_cast<double>(coordinate_r[b]);
            if (double d = distance_to_2pi_lattice(ra + rb); d <= tol) {
                report.violations.push_back({a, b, Resonance::Kind::sum, d});
            }
            if (double d = distance_to_2pi_lattice(ra - rb); d <= tol) {
                report.violations.push_back({a, b, Resonance::Kind::difference, d});
            }
        }
    }
    return report;
}

std::uint64_t cross_agent_counter(const TimerSchedule& schedule, std::uint64_t v, std::size_t i,
                                  std::size_t j) {
    if (i >= schedule.agent_count() || j >= schedule.agent_count()) {
        throw std::out_of_range("cross_agent_counter: agent index out of range");
    }
    if (i == j) return v;
    const auto pi = static_cast<double>(schedule.ratios[i]);
    const auto pj = static_cast<double>(schedule.ratios[j]);
    // Delta + (p_i / p_j) v, kept over the common denominator p_j.
    const double num = schedule.tau0[j] * pj - schedule.tau0[i] * pi + pi * static_cast<double>(v);
    const double count = std::floor(num / pj);
    return count > 0.0 ? static_cast<std::uint64_t>(count) : 0;
}

}  // namespace nashseek

#include "nashseek/sync_seek.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace nashseek {

OscillatorBank::OscillatorBank(Vector freqs, Vector amps, Vector phases)
    : freqs_(std::move(freqs)), amps_(std::move(amps)) {
    const auto m = freqs_.size();
    if (m == 0) throw std::invalid_argument("oscillator bank needs at least one coordinate");
    if (amps_.size() != m) throw std::invalid_argument("one amplitude per coordinate is required");
    if (!freqs_.allFinite() || (freqs_.array() <= 0.0).any()) {
        throw std::invalid_argument("dither frequencies must be positive and finite");
    }
    if (!amps_.allFinite() || (amps_.array() <= 0.0).any()) {
        throw std::invalid_argument(
            "dither amplitudes must be positive: the estimator divides by A");
    }
    if (phases.size() == 0) phases = Vector::Zero(m);
    if (phases.size() != m) throw std::invalid_argument("one phase per coordinate is required");
    states_.resize(2 * m);
    for (Eigen::Index j = 0; j < m; ++j) {
        states_(2 * j) = std::sin(phases(j));
        states_(2 * j + 1) = std::cos(phases(j));
    }
}

OscillatorBank OscillatorBank::for_game(const GameDefinition& game, Vector freqs,
                                        const std::vector<double>& agent_amps, Vector phases) {
    if (agent_amps.size() != game.agent_count()) {
        throw std::invalid_argument("one amplitude per agent is required");
    }
    Vector amps(static_cast<Eigen::Index>(game.dim()));
    for (std::size_t l = 0; l < game.dim(); ++l) {
        amps(static_cast<Eigen::Index>(l)) = agent_amps[game.owner(l)];
    }
    if (static_cast<std::size_t>(freqs.size()) != game.dim()) {
        throw std::invalid_argument("one frequency per scalar coordinate is required");
    }
    return OscillatorBank(std::move(freqs), std::move(amps), std::move(phases));
}

void OscillatorBank::set_states(Vector states) {
    if (states.size() != 2 * freqs_.size()) {
        throw std::invalid_argument("oscillator state must have 2m entries");
    }
    for (Eigen::Index j = 0; j < freqs_.size(); ++j) {
        const double n = std::hypot(states(2 * j), states(2 * j + 1));
        if (std::abs(n - 1.0) > 1e-9) {
            throw std::invalid_argument("oscillator pairs must lie on the unit circle");
        }
    }
    states_ = std::move(states);
}

void OscillatorBank::rotate_in_place(const Vector& coordinate_mask) {
    const bool all = coordinate_mask.size() == 0;
    if (!all && coordinate_mask.size() != freqs_.size()) {
        throw std::invalid_argument("rotation mask must have one entry per coordinate");
    }
    for (Eigen::Index j = 0; j < freqs_.size(); ++j) {
        if (!all && coordinate_mask(j) == 0.0) continue;
        const double c = std::cos(freqs_(j));
        const double s = std::sin(freqs_(j));
        const double sn = states_(2 * j);
        const double cs = states_(2 * j + 1);
        states_(2 * j) = c * sn - s * cs;
        states_(2 * j + 1) = s * sn + c * cs;
    }
    if (++rotations_ % renorm_interval == 0) {
        for (Eigen::Index j = 0; j < freqs_.size(); ++j) {
            const double n = std::hypot(states_(2 * j), states_(2 * j + 1));
            states_(2 * j) /= n;
            states_(2 * j + 1) /= n;
        }
    }
}

double OscillatorBank::max_norm_drift() const {
    double drift = 0.0;
    for (Eigen::Index j = 0; j < freqs_.size(); ++j) {
        drift = std::max(drift, std::abs(std::hypot(states_(2 * j), states_(2 * j + 1)) - 1.0));
    }
    return drift;
}

OscillatorBank rotate(const OscillatorBank& bank) {
    OscillatorBank out = bank;
    out.rotate_in_place();
    return out;
}

OscillatorBank rotate_masked(const OscillatorBank& bank, const Vector& coordinate_mask) {
    OscillatorBank out = bank;
    out.rotate_in_place(coordinate_mask);
    return out;
}

Vector dither_vector(const OscillatorBank& bank) {
    const auto m = static_cast<Eigen::Index>(bank.size());
    Vector d(m);
    for (Eigen::Index j = 0; j < m; ++j) d(j) = bank.states()(2 * j);
    return d;
}

namespace {

void check_bank(const GameDefinition& game, const OscillatorBank& bank) {
    if (bank.size() != game.dim()) {
        throw std::invalid_argument("oscillator bank size does not match game dimension");
    }
}

}  // namespace

Vector estimate_agent_block(const GameDefinition& game, std::size_t i, const Vector& x,
                            const OscillatorBank& bank) {
    check_bank(game, bank);
    const Vector d = dither_vector(bank);
    const Vector probe = x + bank.amps().cwiseProduct(d);
    const double j = eval_cost(game, i, probe);
    const auto o = static_cast<Eigen::Index>(game.offset(i));
    const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
    return 2.0 * j * d.segment(o, n).cwiseQuotient(bank.amps().segment(o, n));
}

Vector estimate_pseudogradient(const GameDefinition& game, const Vector& x,
                               const OscillatorBank& bank) {
    check_bank(game, bank);
    const Vector d = dither_vector(bank);
    const Vector probe = x + bank.amps().cwiseProduct(d);
    Vector est(x.size());
    for (std::size_t i = 0; i < game.agent_count(); ++i) {
        const double j = eval_cost(game, i, probe);
        const auto o = static_cast<Eigen::Index>(game.offset(i));
        const auto n = static_cast<Eigen::Index>(game.agent_dim(i));
        est.segment(o, n) = 2.0 * j * d.segment(o, n).cwiseQuotient(bank.amps().segment(o, n));
    }
    return est;
}

void SyncZOParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
    if (alpha * beta > 1.0) throw std::invalid_argument("alpha * beta must not exceed 1");
}

Vector relaxed_projection_step(const GameDefinition& game, const Vector& x, const Vector& g,
                               double lambda, double gamma) {
    return (1.0 - lambda) * x + lambda * game.project(x - gamma * g);
}

Vector fb_step(const GameDefinition& game, const Vector& x, double lambda, double gamma) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (!game.feasible(x)) throw std::invalid_argument("fb_step: x is not feasible");
    return relaxed_projection_step(game, x, pseudogradient(game, x), lambda, gamma);
}

double fb_contraction_factor(double gamma, double mu_f, double lip_L, double lambda) {
    if (!(gamma > 0.0) || !(mu_f > 0.0) || !(lip_L > 0.0) || lambda < 0.0) {
        throw std::invalid_argument("contraction factor needs positive constants");
    }
    const double c = std::sqrt(1.0 + gamma * gamma * lip_L * lip_L) / (1.0 + gamma * mu_f);
    if (c >= 1.0) {
        std::ostringstream msg;
        msg << "gamma = " << gamma << " is outside the contractive range (c = " << c << ")";
        throw AssumptionViolation(msg.str());
    }
    return 1.0 - lambda * (1.0 - c) * (2.0 - lambda * c);
}

SyncZOState make_sync_state(const GameDefinition& game, Vector x0, OscillatorBank bank) {
    if (static_cast<std::size_t>(x0.size()) != game.dim()) {
        throw std::invalid_argument("initial point dimension does not match game");
    }
    check_bank(game, bank);
    FilterState filter{Vector::Zero(x0.size())};
    return SyncZOState{std::move(x0), std::move(filter), std::move(bank), 0};
}

SyncZOState zo_sync_step(const GameDefinition& game, const SyncZOState& state,
                         const SyncZOParams& params, GradientSource source) {
    params.validate();
    if (!game.feasible(state.x)) throw std::invalid_argument("zo_sync_step: x is not feasible");
    SyncZOState next = state;
    const double lambda = params.alpha * params.beta;
    if (source == GradientSource::oracle) {
        next.filter.xi = pseudogradient(game, state.x);
        next.x = relaxed_projection_step(game, state.x, next.filter.xi, lambda, params.gamma);
    } else {
        next.x = relaxed_projection_step(game, state.x, state.filter.xi, lambda, params.gamma);
        const Vector est = estimate_pseudogradient(game, state.x, state.bank);
        next.filter.xi = (1.0 - params.alpha) * state.filter.xi + params.alpha * est;
    }
    next.bank.rotate_in_place();
    ++next.k;
    return next;
}

std::string Resonance::describe() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::sum:
            out << "w[" << a << "] + w[" << b << "]";
            break;
        case Kind::difference:
            out << "w[" << a << "] - w[" << b << "]";
            break;
        case Kind::single:
            out << "w[" << a << "]";
            break;
        case Kind::doubled:
            out << "2 w[" << a << "]";
            break;
    }
    out << " is within " << distance << " of 2 pi Z";
    return out.str();
}

double distance_to_2pi_lattice(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return std::abs(theta - two_pi * std::round(theta / two_pi));
}

FrequencyReport validate_frequencies_sync(const Vector& freqs, double tol) {
    FrequencyReport report;
    const auto m = static_cast<std::size_t>(freqs.size());
    for (std::size_t a = 0; a < m; ++a) {
        const double wa = freqs(static_cast<Eigen::Index>(a));
        if (double d = distance_to_2pi_lattice(wa); d <= tol) {
            report.violations.push_back({a, a, Resonance::Kind::single, d});
        }
        if (double d = distance_to_2pi_lattice(2.0 * wa); d <= tol) {
            report.violations.push_back({a, a, Resonance::Kind::doubled, d});
        }
        for (std::size_t b = a + 1; b < m; ++b) {
            const double wb = freqs(static_cast<Eigen::Index>(b));
            if (double d = distance_to_2pi_lattice(wa + wb); d <= tol) {
                report.violations.push_back({a, b, Resonance::Kind::sum, d});
            }
            if (double d = distance_to_2pi_lattice(wa - wb); d <= tol) {
                report.violations.push_back({a, b, Resonance::Kind::difference, d});
            }
        }
    }
    return report;
}

Vector generate_frequencies(std::size_t m, std::uint64_t seed, const FrequencyValidator& validator,
                            int max_attempts) {
    if (m == 0) throw std::invalid_argument("generate_frequencies: m must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 0.5);
    Vector freqs(static_cast<Eigen::Index>(m));
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        for (std::size_t j = 0; j < m; ++j) {
            freqs(static_cast<Eigen::Index>(j)) = static_cast<double>(j + 1) + jitter(rng);
        }
        if (!validator || validator(freqs).valid()) return freqs;
    }
    throw AssumptionViolation("no non-resonant frequency set found within the attempt budget");
}

}  // namespace nashseek

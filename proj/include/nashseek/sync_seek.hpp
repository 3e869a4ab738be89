#pragma once

// Synchronous seeking: the full-information forward-backward iteration and the
// zeroth-order variant driven by sinusoidal dithers, a low-pass filter on the
// pseudogradient estimate and a bank of unit-circle oscillators.

#include "nashseek/game.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nashseek {

/// Oscillator states for m scalar coordinates. Pair j occupies states(2j)
/// (sin slot) and states(2j + 1) (cos slot) and is rotated by freqs(j) rad per
/// jump with R = [[cos w, -sin w], [sin w, cos w]].
class OscillatorBank {
public:
    /// amps holds one amplitude per scalar coordinate. Initial pairs are
    /// (sin phase, cos phase); phases default to zero, i.e. (0, 1).
    OscillatorBank(Vector freqs, Vector amps, Vector phases = {});

    /// Amplitudes given per agent and repeated over the agent's coordinates.
    static OscillatorBank for_game(const GameDefinition& game, Vector freqs,
                                   const std::vector<double>& agent_amps, Vector phases = {});

    std::size_t size() const { return static_cast<std::size_t>(freqs_.size()); }
    const Vector& freqs() const { return freqs_; }
    const Vector& amps() const { return amps_; }
    const Vector& states() const { return states_; }
    std::uint64_t rotations() const { return rotations_; }

    /// Replaces the oscillator states; each pair must be on the unit circle.
    void set_states(Vector states);

    /// Rotates the pairs whose coordinate mask entry is nonzero (all when the
    /// mask is empty). Pairs are renormalized every renorm_interval calls.
    void rotate_in_place(const Vector& coordinate_mask = {});

    /// Largest deviation of a pair norm from 1.
    double max_norm_drift() const;

    static constexpr std::uint64_t renorm_interval = 1000;

private:
    Vector freqs_;
    Vector amps_;
    Vector states_;
    std::uint64_t rotations_ = 0;
};

OscillatorBank rotate(const OscillatorBank& bank);
OscillatorBank rotate_masked(const OscillatorBank& bank, const Vector& coordinate_mask);

/// D mu: the sin slot of every pair, in coordinate order.
Vector dither_vector(const OscillatorBank& bank);

/// 2 A^{-1} J(x + A D mu) D mu, where every coordinate of agent i is scaled by
/// J_i at the single perturbed collective point. Uses cost evaluations only.
Vector estimate_pseudogradient(const GameDefinition& game, const Vector& x,
                               const OscillatorBank& bank);

/// The block of the estimate that belongs to agent i (one cost evaluation).
Vector estimate_agent_block(const GameDefinition& game, std::size_t i, const Vector& x,
                            const OscillatorBank& bank);

struct SyncZOParams {
    double alpha = 0.1;
    double beta = 0.01;
    double gamma = 0.1;

    /// Throws std::invalid_argument unless alpha, beta lie in [0, 1] and gamma > 0.
    /// Zero gains freeze the slow states; configs require them to be positive.
    void validate() const;
};

struct FilterState {
    Vector xi;
};

struct SyncZOState {
    Vector x;
    FilterState filter;
    OscillatorBank bank;
    std::uint64_t k = 0;
};

/// dither: the filter is driven by the dither estimate. oracle: xi is pinned to
/// F(x) before the x-update, which turns the scheme into its full-information
/// counterpart.
enum class GradientSource { dither, oracle };

/// (1 - lambda) x + lambda proj_C(x - gamma g).
Vector relaxed_projection_step(const GameDefinition& game, const Vector& x, const Vector& g,
                               double lambda, double gamma);

Vector fb_step(const GameDefinition& game, const Vector& x, double lambda, double gamma);

/// 1 - lambda (1 - c)(2 - lambda c) with c = sqrt(1 + gamma^2 L^2) / (1 + gamma mu).
/// Throws AssumptionViolation when c >= 1.
double fb_contraction_factor(double gamma, double mu_f, double lip_L, double lambda);

SyncZOState zo_sync_step(const GameDefinition& game, const SyncZOState& state,
                         const SyncZOParams& params,
                         GradientSource source = GradientSource::dither);

SyncZOState make_sync_state(const GameDefinition& game, Vector x0, OscillatorBank bank);

struct Resonance {
    enum class Kind { sum, difference, single, doubled };
    std::size_t a = 0;
    std::size_t b = 0;
    Kind kind = Kind::sum;
    /// Distance of the offending combination from 2 pi Z.
    double distance = 0.0;

    std::string describe() const;
};

struct FrequencyReport {
    std::vector<Resonance> violations;
    bool valid() const { return violations.empty(); }
};

/// Distance of theta from the lattice 2 pi Z.
double distance_to_2pi_lattice(double theta);

/// Pairwise check of w_a +- w_b against 2 pi Z for a != b, plus the
/// single-frequency checks w_a and 2 w_a.
FrequencyReport validate_frequencies_sync(const Vector& freqs, double tol = 1e-6);

using FrequencyValidator = std::function<FrequencyReport(const Vector&)>;

/// Integers 1..m plus seeded uniform perturbations in [0, 0.5], redrawn until
/// the validator accepts them. Throws AssumptionViolation after max_attempts.
Vector generate_frequencies(std::size_t m, std::uint64_t seed, const FrequencyValidator& validator,
                            int max_attempts = 100);

}  // namespace nashseek

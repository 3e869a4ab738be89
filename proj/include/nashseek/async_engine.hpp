#pragma once

// Asynchronous sampling. Agent i samples every T_i seconds; with rational
// period ratios the jump pattern repeats after r = sum_i r_i jumps (one epoch),
// so trajectories are simulated in event-indexed time and physical time is
// bookkeeping.
//
// Timer phases tau0 are normalized to [0, 1): agent i's first jump happens at
// (1 - tau0[i]) T_i and the following ones every T_i after that.

#include "nashseek/game.hpp"
#include "nashseek/residual_curve.hpp"
#include "nashseek/sync_seek.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace nashseek {

/// Smallest naturals p with T_i / T_j = p_i / p_j within relative tolerance tol,
/// using continued fractions with denominators up to max_denominator.
/// Throws AssumptionViolation when no such fit exists.
std::vector<std::uint64_t> ratio_to_integers(const std::vector<double>& periods,
                                             double tol = 1e-9,
                                             std::uint64_t max_denominator = 10'000);

struct ScheduleEvent {
    std::size_t agent = 0;
    /// Physical time of the jump inside the first period (0, T].
    double time = 0.0;
};

struct TimerSchedule {
    std::vector<double> periods;
    std::vector<std::uint64_t> ratios;           // p_i
    std::uint64_t lcm_p = 1;                     // p
    std::vector<std::uint64_t> jumps_per_epoch;  // r_i = p / p_i
    std::uint64_t epoch_length = 0;              // r
    std::vector<double> tau0;
    std::vector<ScheduleEvent> events;  // size r, ordered by time
    double period = 0.0;                // T = T_i r_i

    std::size_t agent_count() const { return periods.size(); }
    std::size_t agent_at(std::uint64_t k) const { return events[k % epoch_length].agent; }
    /// Physical time of global jump k (k = 0 is the first jump).
    double time_at(std::uint64_t k) const;
    std::uint64_t r_max() const;
    std::uint64_t r_min() const;
};

/// Merges the agents' jump progressions over one period. Rejects tau0 values
/// that make two agents jump at the same instant (tolerance 1e-9 period units).
TimerSchedule build_schedule(const std::vector<double>& periods, const std::vector<double>& tau0);

/// Diagonals of S_x (m), S_tau (N) and S_mu (2m); entries are 0 or 1.
struct SelectionMatrices {
    Vector sx;
    Vector stau;
    Vector smu;

    Matrix Sx() const { return sx.asDiagonal(); }
    Matrix Stau() const { return stau.asDiagonal(); }
    Matrix Smu() const { return smu.asDiagonal(); }
};

SelectionMatrices selection_for_agents(const GameDefinition& game, const std::vector<bool>& jumping);
SelectionMatrices selection_at(const TimerSchedule& schedule, const GameDefinition& game,
                               std::uint64_t k);

/// x - alpha S_x(k) F(x). Only the jumping agent's block is evaluated.
Vector async_fi_step(const GameDefinition& game, const Vector& x, const TimerSchedule& schedule,
                     std::uint64_t k, double alpha);
/// Same map for arbitrary masks.
Vector async_fi_step(const GameDefinition& game, const Vector& x, const SelectionMatrices& sel,
                     double alpha);

struct AsyncState {
    Vector x;
    Vector xi;
    OscillatorBank bank;
    std::vector<std::uint64_t> kappa;
    std::uint64_t k = 0;
    double t = 0.0;
};

AsyncState make_async_state(const GameDefinition& game, Vector x0, OscillatorBank bank);

/// One jump of the zeroth-order scheme for the agent(s) selected at jump k:
/// x+ = x - alpha beta S xi, xi+ = xi + alpha S (estimate - xi), mu rotated
/// on the selected pairs. gamma is not used.
AsyncState async_zo_step(const GameDefinition& game, const AsyncState& state,
                         const TimerSchedule& schedule, const SyncZOParams& params,
                         GradientSource source = GradientSource::dither);
/// Same map for arbitrary masks; t is left unchanged.
AsyncState async_zo_step(const GameDefinition& game, const AsyncState& state,
                         const SelectionMatrices& sel, const SyncZOParams& params,
                         GradientSource source = GradientSource::dither);

using VectorMap = std::function<Vector(const Vector&)>;

/// T(x) = x - alpha Gamma F(x), E(x) = the r per-jump maps of one epoch in
/// schedule order, R(x) = (T(x) - E(x)) / alpha.
struct EpochOperators {
    VectorMap T;
    VectorMap E;
    VectorMap R;
};

/// Throws std::invalid_argument for constrained games.
EpochOperators epoch_operators(const GameDefinition& game, const TimerSchedule& schedule,
                               double alpha);

/// diag(Gamma) = r_i repeated over agent i's coordinates.
Vector gamma_weights(const GameDefinition& game, const TimerSchedule& schedule);
/// ||v||^2_{Gamma^{-1}} = sum_l v_l^2 / r_{owner(l)}.
double gamma_weighted_sq_norm(const GameDefinition& game, const TimerSchedule& schedule,
                              const Vector& v);

/// Left-hand side of the step-size condition; feasible when <= 0.
double stepsize_condition(double alpha, double eta, double mu_f, double lip_L, std::uint64_t r,
                          std::uint64_t r_max);

struct StepsizeBound {
    double alpha = 0.0;
    double eta = 0.0;
};

/// Largest alpha (bisection to 1e-6 relative width) for which some eta on a
/// 200-point log grid in [1e-4, 10] with alpha <= eta / 10 satisfies the
/// condition. Throws AssumptionViolation when nothing is feasible.
StepsizeBound max_stepsize(double mu_f, double lip_L, const TimerSchedule& schedule);

/// 1 - alpha mu^2 r_min^2 / 2.
double epoch_contraction_factor(double alpha, double mu_f, const TimerSchedule& schedule);

struct ContractionReport {
    /// (epoch, V) with V = ||x - x*||^2_{Gamma^{-1}} at epoch boundaries.
    ResidualCurve curve;
    double factor = 1.0;
    /// Largest V(n + 1) / V(n) over epochs with V(n) above the roundoff floor
    /// max(1e-24, 1e-16 V(0)).
    double worst_ratio = 0.0;
    /// Epochs n whose step n -> n + 1 broke the bound.
    std::vector<std::size_t> violations;
    bool holds() const { return violations.empty(); }
};

ContractionReport epoch_contraction_check(const GameDefinition& game,
                                          const TimerSchedule& schedule, double alpha,
                                          const Vector& x0, std::size_t epochs);

struct UgesReport {
    /// Largest V(k) / bound(k) along the per-jump trajectory.
    double worst_ratio = 0.0;
    std::uint64_t worst_jump = 0;
    bool holds() const { return worst_ratio <= 1.0; }
};

/// Per-jump check of V(k) <= (1 + alpha L r_max / r_min)^{2r}
/// (1 - alpha mu^2 r_min^2 / 2)^{k / r - 1} V(0), skipping jumps at the roundoff floor.
UgesReport uges_trajectory_check(const GameDefinition& game, const TimerSchedule& schedule,
                                 double alpha, const Vector& x0, std::uint64_t jumps);

/// Number of jumps per epoch for every scalar coordinate.
std::vector<std::uint64_t> coordinate_epoch_counts(const GameDefinition& game,
                                                   const TimerSchedule& schedule);

/// Checks w_a r_a +- w_b r_b against 2 pi Z for a != b, plus the single
/// frequency checks w_a and 2 w_a on each agent's own clock.
FrequencyReport validate_frequencies_async(const Vector& freqs,
                                           const std::vector<std::uint64_t>& coordinate_r,
                                           double tol = 1e-6);

/// Agent j's jump count at the instant of agent i's v-th jump (v >= 1),
/// floor(Delta + (T_i / T_j) v) with Delta = tau0_j - tau0_i p_i / p_j.
std::uint64_t cross_agent_counter(const TimerSchedule& schedule, std::uint64_t v, std::size_t i,
                                  std::size_t j);

}  // namespace nashseek

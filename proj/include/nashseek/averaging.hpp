#pragma once

// Numerical checks for discrete-time averaging: boundary-layer rollouts,
// averaging residuals, the dither estimator and filter residuals, the eta
// perturbation dynamics and Lyapunov traces.

#include "nashseek/async_engine.hpp"
#include "nashseek/game.hpp"
#include "nashseek/residual_curve.hpp"
#include "nashseek/sync_seek.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nashseek {

/// u+ = u + eps G(u, mu), mu+ = M(u, mu), with the averaged map G_avg.
struct SystemPair {
    using Map = std::function<Vector(const Vector& u, const Vector& mu)>;

    Map G;
    Map G_avg;
    Map M;
    double eps = 0.1;
    double gamma_param = 1.0;
    /// Membership test for the compact set Omega; empty means "anything".
    std::function<bool(const Vector&)> in_omega;
    std::string omega_desc;
};

/// mu(0..N) with u frozen. Throws AssumptionViolation if mu leaves Omega.
std::vector<Vector> boundary_layer_rollout(const SystemPair& pair, const Vector& u_fixed,
                                           const Vector& mu0, std::uint64_t N);

/// ||(1/N) sum_{i<N} [G - G_avg](u_fixed, mu_bl(i))|| for each N in N_list.
ResidualCurve averaging_residual(const SystemPair& pair, const Vector& u_fixed,
                                 const Vector& mu0, const std::vector<std::uint64_t>& N_list);

struct SineSumConstants {
    /// Bounds on |sum_{k<N} cos(phi k)|, |sum sin(phi k)|, |sum sin(phi_i k) sin(phi_l k)|
    /// (i != l) and |sum (sin^2(phi k) - 1/2)| over all N. +inf when undefined.
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    std::vector<std::string> resonances;
    bool defined() const { return resonances.empty(); }
};

SineSumConstants sine_sum_constants(const std::vector<double>& phis, double tol = 1e-12);

/// ||(1/N) sum_{k<N} estimate(x, mu_k) - F(x)|| along the oscillator orbit.
ResidualCurve estimator_residual(const GameDefinition& game, const Vector& x_fixed,
                                 const OscillatorBank& bank,
                                 const std::vector<std::uint64_t>& N_list);

/// Mean over k < N of the estimator's first-order Taylor remainder,
/// ||(2/a) [J(x + A d) - J(x) - grad J(x) . A d] d||, which is O(a).
double estimator_floor(const GameDefinition& game, const Vector& x_fixed,
                       const OscillatorBank& bank, std::uint64_t N);

struct EstimatorBoundFit {
    double K1 = 0.0;
    double K2 = 0.0;
    struct Sample {
        std::uint64_t N;
        double amplitude;
        double residual;
    };
    std::vector<Sample> samples;
    /// Max over samples of residual - (K1 / N + K2 a); <= 0 up to roundoff.
    double worst_slack = 0.0;
};

/// Nonnegative K1, K2 with residual <= K1 / N + K2 a at every sample,
/// minimizing the summed bound. Amplitudes are applied to every coordinate.
EstimatorBoundFit fit_estimator_bound(const GameDefinition& game, const Vector& x_fixed,
                                      const Vector& freqs, const std::vector<double>& amplitudes,
                                      const std::vector<std::uint64_t>& N_list);

/// (gamma / N) ||sum_{i<N} (xi_bl(i) - F)|| with xi_bl(k+1) = (1 - alpha) xi_bl(k) + alpha F.
ResidualCurve filter_residual(const Vector& F, const Vector& xi0, double alpha, double gamma,
                              const std::vector<std::uint64_t>& N_list);
ResidualCurve filter_residual(const GameDefinition& game, const Vector& x_fixed,
                              const Vector& xi0, double alpha, double gamma,
                              const std::vector<std::uint64_t>& N_list);
/// gamma ||xi0 - F|| / (N alpha).
double filter_residual_bound(const Vector& F, const Vector& xi0, double alpha, double gamma,
                             std::uint64_t N);

/// Class-L model sigma(N) = min(sigma0, C / N) built from measured residuals.
struct SigmaFit {
    double C = 0.0;
    double sigma0 = 0.0;
    double operator()(double N) const { return N <= 0.0 ? sigma0 : std::min(sigma0, C / N); }
};

/// C is the smallest constant with residual(N) <= C / N over N_list at every
/// u in u_points; sigma0 is the largest ||G - G_avg|| seen on those rollouts.
SigmaFit fit_sigma(const SystemPair& pair, const std::vector<Vector>& u_points, const Vector& mu0,
                   const std::vector<std::uint64_t>& N_list);

struct EtaRow {
    double eps = 0.0;
    double sup_norm = 0.0;
    double bound = 0.0;
};

struct EtaReport {
    std::vector<EtaRow> rows;
    SigmaFit sigma;
    std::uint64_t L_window = 0;
    bool monotone = false;
    bool below_bound = false;
};

struct EtaOptions {
    std::uint64_t L_window = 100;
    /// Simulated length in units of eps * steps, so every eps covers the same
    /// stretch of averaged time.
    double horizon = 20.0;
    std::vector<std::uint64_t> sigma_N_list{100, 1000, 10000};
};

/// Runs the coupled (u, mu, eta) system from (u0, mu0, 0) for every eps and
/// compares sup ||eta|| with (1 + eps + e) sigma(L) + 3 eps L sigma(0).
EtaReport eta_rollout(const SystemPair& pair, const Vector& u0, const Vector& mu0,
                      const std::vector<double>& eps_list, const EtaOptions& options = {});

/// Scalar dither example: u is a decision vector, mu the oscillator pairs and
/// G the negated dither estimate of grad J for J(u) = sum_l q_l (u_l - c_l)^2.
SystemPair dither_example_pair(const Vector& q, const Vector& center, const Vector& freqs,
                               double amplitude, double eps);

struct LyapunovSpec {
    Vector center;
    /// Diagonal weights w in V = sum_l w_l (x_l - center_l)^2; empty means 1.
    Vector weights;
    /// Steps with ||x - center|| < rho are not judged.
    double rho = 0.0;
    std::size_t burn_in = 0;
    /// Compare V at samples stride apart.
    std::size_t stride = 1;
    /// Slack for a "decrease": V(t + stride) <= V(t) (1 + rel_tol) + abs_tol.
    double rel_tol = 1e-12;
    double abs_tol = 1e-20;
};

struct LyapunovReport {
    std::vector<double> values;
    std::vector<std::size_t> violations;
    std::size_t judged = 0;
    double violation_fraction() const {
        return judged == 0 ? 0.0 : static_cast<double>(violations.size()) / static_cast<double>(judged);
    }
};

double lyapunov_value(const LyapunovSpec& spec, const Vector& x);
LyapunovReport lyapunov_trace(const std::vector<Vector>& trajectory, const LyapunovSpec& spec);

struct AsyncSineSumReport {
    ResidualCurve curve;  // (l, |sum|)
    /// 2 r_i / |1 - z| with z = exp(j (w1 r_i + w2 r_j)); +inf at resonance.
    double bound = std::numeric_limits<double>::infinity();
    bool resonant = false;
    /// Always false at resonance.
    bool within_bound = false;
    /// |sum| / (r_i l) at the largest l. Stays O(1) only when the sum grows linearly.
    double per_term_last = 0.0;
};

/// |sum_{v=1}^{r_i l} exp(j (w1 v + w2 kappa_j(v, i)))| for each l.
AsyncSineSumReport async_sine_sum_check(const TimerSchedule& schedule, double omega1,
                                        double omega2, std::size_t i, std::size_t j,
                                        const std::vector<std::uint64_t>& l_list,
                                        double tol = 1e-6);

}  // namespace nashseek

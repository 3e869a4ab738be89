#include "nashseek/averaging.hpp"
#include "nashseek/sync_seek.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nashseek;
namespace nt = nashseek::testing;

namespace {

FrequencyValidator sync_validator() {
    return [](const Vector& w) { return validate_frequencies_sync(w); };
}

}  // namespace

TEST_CASE("oscillator pairs start at (0, 1) and rotate by the frequency") {
    Vector w(2);
    w << 0.3, 1.1;
    OscillatorBank b(w, Vector::Constant(2, 0.1));
    CHECK(b.states()(0) == 0.0);
    CHECK(b.states()(1) == 1.0);
    for (int k = 0; k < 5; ++k) b.rotate_in_place();
    // R = [[c, -s], [s, c]] applied to (sin, cos) runs the sin slot backwards
    CHECK(b.states()(0) == doctest::Approx(-std::sin(5 * 0.3)).epsilon(1e-13));
    CHECK(b.states()(1) == doctest::Approx(std::cos(5 * 0.3)).epsilon(1e-13));
    CHECK(b.states()(2) == doctest::Approx(-std::sin(5 * 1.1)).epsilon(1e-13));
    CHECK(dither_vector(b)(1) == b.states()(2));
}

TEST_CASE("oscillator bank validation") {
    CHECK_THROWS(OscillatorBank(Vector::Ones(2), Vector::Zero(2)));
    CHECK_THROWS(OscillatorBank(Vector::Ones(2), Vector::Ones(3)));
    OscillatorBank b(Vector::Ones(1), Vector::Ones(1));
    Vector s(2);
    s << 0.5, 0.5;
    CHECK_THROWS(b.set_states(s));
}

TEST_CASE("oscillator pairs stay on the unit circle for 1e6 steps") {
    Vector w(3);
    w << 1.0671, 2.0683, 3.2264;
    OscillatorBank b(w, Vector::Constant(3, 0.1));
    for (int k = 0; k < 1'000'000; ++k) b.rotate_in_place();
    CHECK(b.max_norm_drift() < 1e-6);
    CHECK(b.rotations() == 1'000'000);
}

TEST_CASE("masked rotation leaves unselected pairs alone") {
    OscillatorBank b(Vector::Constant(2, 0.5), Vector::Constant(2, 0.1));
    Vector mask(2);
    mask << 0.0, 1.0;
    const OscillatorBank r = rotate_masked(b, mask);
    CHECK(r.states()(0) == 0.0);
    CHECK(r.states()(1) == 1.0);
    CHECK(r.states()(2) == doctest::Approx(-std::sin(0.5)));
}

TEST_CASE("single-coordinate dither estimate") {
    // J = (x - 1)^2, x = 0.3, a = 0.2, oscillator at phase 0.7
    const GameDefinition g =
        make_quadratic_game({1}, 2.0 * Matrix::Identity(1, 1), Vector::Constant(1, -2.0));
    OscillatorBank b(Vector::Constant(1, 1.0), Vector::Constant(1, 0.2), Vector::Constant(1, 0.7));
    // cost of the quadratic game is x^2 - 2x, one less than (x - 1)^2
    const double shift = -1.0 * 2.0 / 0.2 * std::sin(0.7);
    const Vector est = estimate_pseudogradient(g, Vector::Constant(1, 0.3), b);
    CHECK(est(0) == doctest::Approx(2.101565037031443 + shift).epsilon(1e-12));
    CHECK(estimate_agent_block(g, 0, Vector::Constant(1, 0.3), b)(0) == doctest::Approx(est(0)));
}

TEST_CASE("forward-backward contraction factor") {
    CHECK(fb_contraction_factor(0.1, 2.0, 3.0, 0.7) == doctest::Approx(0.8734454973756339).epsilon(1e-14));
    CHECK_THROWS_AS(fb_contraction_factor(10.0, 1.0, 10.0, 1.0), AssumptionViolation);
}

TEST_CASE("fb_step contracts at lambda = 1, gamma = mu / L^2") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const GameDefinition g = nt::random_quadratic_game(rng, nt::random_dims(rng, 8));
        const Vector xs = solve_ne_oracle(g);
        const double gamma = g.mu_f() / (g.lip_L() * g.lip_L());
        const double c = std::sqrt(1.0 + gamma * gamma * g.lip_L() * g.lip_L()) / (1.0 + gamma * g.mu_f());
        Vector x = nt::random_vector(rng, static_cast<Eigen::Index>(g.dim()), 5.0);
        for (int k = 0; k < 50; ++k) {
            const double d0 = (x - xs).norm();
            if (d0 < 1e-8) break;
            x = fb_step(g, x, 1.0, gamma);
            CHECK((x - xs).norm() <= c * d0 + 1e-12);
        }
    }
}

TEST_CASE("zo_sync_step with the gradient oracle reproduces fb_step") {
    std::mt19937_64 rng(22);
    const std::vector<ConstraintSet> sets{ConstraintSet::box(Vector::Constant(2, -2), Vector::Constant(2, 2)),
                                          ConstraintSet::box(Vector::Constant(2, -2), Vector::Constant(2, 2))};
    const GameDefinition g = nt::random_quadratic_game(rng, {2, 2}, 0.5, 1.0, sets);
    const SyncZOParams p{0.3, 0.2, 0.4};
    const Vector freqs = generate_frequencies(4, 1, sync_validator());
    SyncZOState s = make_sync_state(g, Vector::Zero(4), OscillatorBank(freqs, Vector::Constant(4, 0.1)));
    Vector x = Vector::Zero(4);
    for (int k = 0; k < 500; ++k) {
        s = zo_sync_step(g, s, p, GradientSource::oracle);
        x = fb_step(g, x, p.alpha * p.beta, p.gamma);
        REQUIRE((s.x - x).norm() == 0.0);
    }
    CHECK(s.k == 500);
}

TEST_CASE("zo_sync_step moves x with the filter state from before the update") {
    const GameDefinition g = nt::four_agent_game();
    const Vector freqs = generate_frequencies(8, 1, sync_validator());
    SyncZOState s = make_sync_state(g, Vector::Zero(8), OscillatorBank::for_game(g, freqs, {0.1, 0.1, 0.1, 0.1}));
    s.filter.xi = Vector::Constant(8, 2.0);
    const SyncZOParams p{0.5, 0.1, 0.25};
    const SyncZOState n = zo_sync_step(g, s, p);
    // x+ = (1 - ab) x + ab (x - gamma xi) with x = 0
    CHECK((n.x - Vector::Constant(8, -0.05 * 0.25 * 2.0)).norm() <= 1e-15);
    const Vector est = estimate_pseudogradient(g, s.x, s.bank);
    CHECK((n.filter.xi - (0.5 * s.filter.xi + 0.5 * est)).norm() <= 1e-12);
    CHECK_THROWS(zo_sync_step(g, s, SyncZOParams{1.5, 0.1, 0.1}));
    CHECK_THROWS(zo_sync_step(g, s, SyncZOParams{0.5, 0.1, 0.0}));
}

TEST_CASE("zero-order synchronous run reaches the equilibrium of a box-constrained game") {
    std::vector<ConstraintSet> sets(2, ConstraintSet::box(Vector::Constant(2, -2), Vector::Constant(2, 2)));
    const GameDefinition g = make_connectivity_game({{0, 0}, {1, 0}}, 0.04).with_constraints(sets);
    const Vector xs = solve_ne_oracle(g);
    const Vector freqs = generate_frequencies(4, 1, sync_validator());
    SyncZOState s = make_sync_state(g, Vector::Zero(4), OscillatorBank::for_game(g, freqs, {0.1, 0.1}));
    const SyncZOParams p{0.1, 0.01, 0.1};
    for (int k = 0; k < 100000; ++k) s = zo_sync_step(g, s, p);
    CHECK((s.x - xs).norm() < 0.05);
}

TEST_CASE("synchronous frequency validation") {
    Vector w(2);
    w << 1.0, 2.0;
    CHECK(validate_frequencies_sync(w).valid());
    w << std::numbers::pi, std::numbers::pi;
    FrequencyReport r = validate_frequencies_sync(w);
    REQUIRE_FALSE(r.valid());
    bool saw_difference = false;
    for (const auto& v : r.violations) saw_difference |= v.kind == Resonance::Kind::difference;
    CHECK(saw_difference);
    w << 1.0, 2.0 * std::numbers::pi - 1.0;
    r = validate_frequencies_sync(w);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == Resonance::Kind::sum);
    CHECK(r.violations[0].describe().find("w[0] + w[1]") != std::string::npos);
    CHECK(distance_to_2pi_lattice(4.0 * std::numbers::pi + 0.1) == doctest::Approx(0.1));
}

TEST_CASE("generated frequencies follow the perturbed-integer recipe") {
    const Vector a = generate_frequencies(8, 42, sync_validator());
    const Vector b = generate_frequencies(8, 42, sync_validator());
    CHECK((a - b).norm() == 0.0);
    for (Eigen::Index j = 0; j < 8; ++j) {
        CHECK(a(j) >= j + 1.0);
        CHECK(a(j) <= j + 1.5);
    }
    CHECK(validate_frequencies_sync(a).valid());
    const FrequencyValidator never = [](const Vector&) {
        FrequencyReport r;
        r.violations.push_back({});
        return r;
    };
    CHECK_THROWS_AS(generate_frequencies(3, 1, never), AssumptionViolation);
}

TEST_CASE("estimator is unbiased up to K1 / N + K2 a") {
    const GameDefinition g = make_connectivity_game({{0, 0}, {1, 0}}, 0.04);
    const Vector xs = solve_ne_oracle(g);
    const Vector freqs = generate_frequencies(4, 2, sync_validator());
    const EstimatorBoundFit fit =
        fit_estimator_bound(g, xs, freqs, {0.05, 0.1, 0.2}, {100, 1000, 10000});
    CHECK(fit.K1 >= 0.0);
    CHECK(fit.K2 >= 0.0);
    CHECK(fit.samples.size() == 9);
    CHECK(fit.worst_slack <= 1e-12);
}

#include "nashseek/async_engine.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace nashseek;
namespace nt = nashseek::testing;

TEST_CASE("period ratios to integers") {
    const auto p = ratio_to_integers(nt::four_agent_periods());
    CHECK(p == std::vector<std::uint64_t>{2, 3, 4, 2});
    CHECK(ratio_to_integers({0.3, 0.3}) == std::vector<std::uint64_t>{1, 1});
    CHECK(ratio_to_integers({1.0, 2.5, 0.5}) == std::vector<std::uint64_t>{2, 5, 1});
    CHECK_THROWS_AS(ratio_to_integers({1.0, std::numbers::pi}), AssumptionViolation);
    CHECK_THROWS(ratio_to_integers({1.0, -1.0}));
}

TEST_CASE("four-agent schedule") {
    const TimerSchedule s = nt::four_agent_schedule();
    CHECK(s.lcm_p == 12);
    CHECK(s.jumps_per_epoch == std::vector<std::uint64_t>{6, 4, 3, 6});
    CHECK(s.epoch_length == 19);
    CHECK(s.period == doctest::Approx(0.06));
    const std::vector<std::size_t> order{3, 0, 1, 2, 3, 0, 3, 1, 0, 2, 3, 0, 1, 3, 0, 2, 3, 1, 0};
    REQUIRE(s.events.size() == order.size());
    for (std::size_t k = 0; k < order.size(); ++k) CHECK(s.events[k].agent == order[k]);
    CHECK(s.events[0].time == doctest::Approx(0.00994));
    CHECK(s.time_at(19) == doctest::Approx(0.06 + 0.00994));
    CHECK(s.r_max() == 6);
    CHECK(s.r_min() == 3);
}

TEST_CASE("schedule invariants over random phases") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> ratio(1, 7), agents(1, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> periods(static_cast<std::size_t>(agents(rng)));
        for (auto& p : periods) p = 0.01 * ratio(rng);
        const TimerSchedule s = nt::random_schedule(rng, periods);
        std::uint64_t g = 0;
        for (auto p : s.ratios) g = std::gcd(g, p);
        CHECK(g == 1);
        CHECK(s.events.size() == s.epoch_length);
        std::vector<std::uint64_t> seen(s.agent_count(), 0);
        for (const auto& e : s.events) ++seen[e.agent];
        CHECK(seen == s.jumps_per_epoch);
        for (std::size_t k = 1; k < s.events.size(); ++k) CHECK(s.events[k].time > s.events[k - 1].time);
        for (std::uint64_t k = 0; k < 3 * s.epoch_length; ++k) {
            CHECK(s.agent_at(k) == s.agent_at(k + s.epoch_length));
            CHECK(s.time_at(k + 1) > s.time_at(k));
        }
    }
}

TEST_CASE("simultaneous jumps are rejected") {
    CHECK_THROWS(build_schedule({0.01, 0.01}, {0.3, 0.3}));
    // agent 1's second jump coincides with agent 0's first
    CHECK_THROWS(build_schedule({0.02, 0.01}, {0.0, 0.0}));
    CHECK_THROWS(build_schedule({0.01, 0.01}, {0.0, 1.0}));
    CHECK_NOTHROW(build_schedule({0.01, 0.01}, {0.0, 0.5}));
}

TEST_CASE("selection matrices follow the jumping agent") {
    const GameDefinition g = nt::four_agent_game();
    const TimerSchedule s = nt::four_agent_schedule();
    for (std::uint64_t k = 0; k < 40; ++k) {
        const SelectionMatrices sel = selection_at(s, g, k);
        const std::size_t a = s.agent_at(k);
        for (std::size_t l = 0; l < g.dim(); ++l) {
            const double expect = g.owner(l) == a ? 1.0 : 0.0;
            CHECK(sel.sx(static_cast<Eigen::Index>(l)) == expect);
            CHECK(sel.smu(static_cast<Eigen::Index>(2 * l)) == expect);
            CHECK(sel.smu(static_cast<Eigen::Index>(2 * l + 1)) == expect);
        }
        CHECK(sel.stau.sum() == 1.0);
        CHECK(sel.stau(static_cast<Eigen::Index>(a)) == 1.0);
    }
    const auto counts = coordinate_epoch_counts(g, s);
    CHECK(counts == std::vector<std::uint64_t>{6, 6, 4, 4, 3, 3, 6, 6});
}

TEST_CASE("epoch map of a linear game is the product of the per-jump matrices") {
    Matrix a(2, 2);
    a << 2.0, 0.5, -0.5, 1.5;
    const GameDefinition g = make_quadratic_game({1, 1}, a, Vector::Zero(2));
    const TimerSchedule s = build_schedule({0.01, 0.01}, {0.0, 0.5});
    const double alpha = 0.05;
    Matrix prod = Matrix::Identity(2, 2);
    for (const auto& e : s.events) {
        Matrix sel = Matrix::Zero(2, 2);
        sel(static_cast<Eigen::Index>(e.agent), static_cast<Eigen::Index>(e.agent)) = 1.0;
        prod = (Matrix::Identity(2, 2) - alpha * sel * a) * prod;
    }
    const EpochOperators ops = epoch_operators(g, s, alpha);
    std::mt19937_64 rng(32);
    for (int t = 0; t < 10; ++t) {
        const Vector x = nt::random_vector(rng, 2, 3.0);
        CHECK((ops.E(x) - prod * x).norm() <= 1e-13);
        CHECK((ops.T(x) - (x - alpha * a * x)).norm() <= 1e-13);
        CHECK((ops.T(x) - ops.E(x) - alpha * ops.R(x)).norm() <= 1e-12);
    }
}

TEST_CASE("single-agent epoch has T = E and R = 0") {
    const GameDefinition g = make_quadratic_game({2}, 2.0 * Matrix::Identity(2, 2), Vector::Ones(2));
    const TimerSchedule s = build_schedule({0.1}, {0.0});
    CHECK(s.epoch_length == 1);
    const EpochOperators ops = epoch_operators(g, s, 0.1);
    Vector x(2);
    x << 1.0, -2.0;
    CHECK((ops.T(x) - ops.E(x)).norm() == 0.0);
    CHECK(ops.R(x).norm() == 0.0);
}

TEST_CASE("error operator shrinks linearly in alpha") {
    const GameDefinition g = nt::four_agent_game();
    const TimerSchedule s = nt::four_agent_schedule();
    Vector x = nt::four_agent_ne();
    x.array() += 3.0;
    std::vector<double> norms;
    for (double alpha : {1e-3, 5e-4, 2.5e-4, 1.25e-4}) norms.push_back(epoch_operators(g, s, alpha).R(x).norm());
    for (std::size_t i = 1; i < norms.size(); ++i) {
        const double slope = std::log2(norms[i - 1] / norms[i]);
        CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("constrained games have no epoch operators") {
    std::vector<ConstraintSet> sets(4, ConstraintSet::ball(Vector::Zero(2), 30.0));
    const GameDefinition g = nt::four_agent_game().with_constraints(sets);
    CHECK_THROWS(epoch_operators(g, nt::four_agent_schedule(), 1e-3));
}

TEST_CASE("step-size bound") {
    CHECK(stepsize_condition(1e-3, 0.05, 2.0, 2.32, 19, 6) ==
          doctest::Approx(0.3398980697027795).epsilon(1e-13));

    const GameDefinition g = nt::four_agent_game();
    const StepsizeBound b = max_stepsize(g.mu_f(), g.lip_L(), nt::four_agent_schedule());
    CHECK(b.alpha == doctest::Approx(0.00104013).epsilon(1e-4));
    CHECK(stepsize_condition(b.alpha, b.eta, g.mu_f(), g.lip_L(), 19, 6) <= 0.0);
    CHECK(b.alpha <= b.eta / 10.0);

    const TimerSchedule one = build_schedule({1.0}, {0.0});
    CHECK(max_stepsize(1.0, 1.0, one).alpha > 0.0);

    // flat while alpha <= eta / 10 binds, then falling
    const double first = max_stepsize(1.0, 1.0, one).alpha;
    double prev = first;
    for (double L = 2.0; L <= 1024.0; L *= 2.0) {
        const double a = max_stepsize(1.0, L, one).alpha;
        CHECK(a <= prev * (1.0 + 1e-6));
        prev = a;
    }
    CHECK(prev < first / 10.0);
    CHECK(epoch_contraction_factor(0.001, 2.0, nt::four_agent_schedule()) == doctest::Approx(1.0 - 0.018));
}

TEST_CASE("epoch contraction from the equilibrium is flat zero") {
    const GameDefinition g = nt::four_agent_game();
    const ContractionReport r =
        epoch_contraction_check(g, nt::four_agent_schedule(), 5e-4, nt::four_agent_ne(), 20);
    for (const auto& p : r.curve.points()) CHECK(p.value <= 1e-24);
    CHECK(r.holds());
}

TEST_CASE("epoch contraction and per-jump bound with one jump per agent per epoch") {
    // mu r_min = 2 here; the four-agent schedule has mu r_min = 6
    const GameDefinition g = make_connectivity_game({{-4, -8}, {-12, -3}}, 0.04);
    const Vector xs = solve_ne_oracle(g);
    std::mt19937_64 rng(33);
    for (int t = 0; t < 5; ++t) {
        const TimerSchedule s = nt::random_schedule(rng, {0.01, 0.01});
        const double alpha = max_stepsize(g.mu_f(), g.lip_L(), s).alpha / 2.0;
        const Vector x0 = xs + nt::random_vector(rng, 4, 10.0);
        const ContractionReport r = epoch_contraction_check(g, s, alpha, x0, 500);
        CHECK(r.holds());
        CHECK(r.worst_ratio <= r.factor);
        const UgesReport u = uges_trajectory_check(g, s, alpha, x0, 5000);
        CHECK(u.holds());
    }
}

TEST_CASE("gamma-weighted norm") {
    const GameDefinition g = nt::four_agent_game();
    const TimerSchedule s = nt::four_agent_schedule();
    const Vector v = Vector::Ones(8);
    CHECK(gamma_weighted_sq_norm(g, s, v) == doctest::Approx(2.0 / 6 + 2.0 / 4 + 2.0 / 3 + 2.0 / 6));
}

TEST_CASE("asynchronous frequency validation") {
    Vector w(2);
    w << std::numbers::pi / 3.0, std::numbers::pi / 2.0;
    CHECK_FALSE(validate_frequencies_async(w, {6, 4}).valid());

    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> u(0.1, 6.0);
    for (int t = 0; t < 100; ++t) {
        Vector f(3);
        for (Eigen::Index j = 0; j < 3; ++j) f(j) = u(rng);
        CHECK(validate_frequencies_async(f, {1, 1, 1}).valid() == validate_frequencies_sync(f).valid());
    }
}

TEST_CASE("cross-agent counter") {
    const TimerSchedule s = build_schedule({1.0, 1.0}, {0.0, 0.5});
    CHECK(cross_agent_counter(s, 3, 0, 1) == 3);
    CHECK(cross_agent_counter(s, 3, 1, 0) == 2);
    CHECK(cross_agent_counter(s, 7, 1, 1) == 7);
    const TimerSchedule sched = nt::four_agent_schedule();
    // agent 2 (period 0.02) has jumped once when agent 0 jumps for the 3rd time
    CHECK(cross_agent_counter(sched, 3, 0, 2) == 1);
    CHECK_THROWS(cross_agent_counter(sched, 1, 0, 4));
}

TEST_CASE("asynchronous full-information step touches only the jumping block") {
    const GameDefinition g = nt::four_agent_game();
    const TimerSchedule s = nt::four_agent_schedule();
    const Vector x = Vector::Ones(8);
    const Vector n = async_fi_step(g, x, s, 0, 0.01);
    const Vector F = pseudogradient(g, x);
    for (Eigen::Index l = 0; l < 8; ++l) {
        if (g.owner(static_cast<std::size_t>(l)) == 3) {
            CHECK(n(l) == doctest::Approx(x(l) - 0.01 * F(l)));
        } else {
            CHECK(n(l) == x(l));
        }
    }
}

TEST_CASE("asynchronous zero-order step") {
    const GameDefinition g = nt::four_agent_game();
    const TimerSchedule s = nt::four_agent_schedule();
    Vector freqs(8);
    freqs << 1.1, 2.2, 3.3, 4.1, 5.2, 6.3, 7.1, 8.2;
    AsyncState st = make_async_state(g, Vector::Ones(8), OscillatorBank::for_game(g, freqs, {0.1, 0.1, 0.1, 0.1}));
    st.xi = Vector::Constant(8, 0.5);
    const SyncZOParams p{0.1, 0.003, 0.1};

    SUBCASE("only the jumping agent changes") {
        for (int k = 0; k < 60; ++k) {
            const AsyncState n = async_zo_step(g, st, s, p);
            const std::size_t a = s.agent_at(st.k);
            for (std::size_t l = 0; l < 8; ++l) {
                const auto li = static_cast<Eigen::Index>(l);
                if (g.owner(l) == a) {
                    CHECK(n.x(li) == doctest::Approx(st.x(li) - 0.1 * 0.003 * st.xi(li)));
                } else {
                    CHECK(n.x(li) == st.x(li));
                    CHECK(n.xi(li) == st.xi(li));
                    CHECK(n.bank.states()(2 * li) == st.bank.states()(2 * li));
                }
            }
            CHECK(n.t >= st.t);
            st = n;
            std::uint64_t sum = 0;
            for (auto kk : st.kappa) sum += kk;
            CHECK(sum == st.k);
        }
    }

    SUBCASE("empty selection only advances k") {
        const SelectionMatrices none = selection_for_agents(g, std::vector<bool>(4, false));
        const AsyncState n = async_zo_step(g, st, none, p);
        CHECK(n.k == st.k + 1);
        CHECK((n.x - st.x).norm() == 0.0);
        CHECK((n.xi - st.xi).norm() == 0.0);
        CHECK((n.bank.states() - st.bank.states()).norm() == 0.0);
    }

    SUBCASE("all agents selected reduces to the synchronous step") {
        const SelectionMatrices all = selection_for_agents(g, std::vector<bool>(4, true));
        const SyncZOParams q{0.1, 0.003, 1.0};
        SyncZOState ss = make_sync_state(g, st.x, st.bank);
        ss.filter.xi = st.xi;
        for (int k = 0; k < 100; ++k) {
            st = async_zo_step(g, st, all, q);
            ss = zo_sync_step(g, ss, q);
        }
        CHECK((st.x - ss.x).norm() <= 1e-12);
        CHECK((st.xi - ss.filter.xi).norm() <= 1e-12);
    }
}

#include "nashseek/game.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace nashseek;
namespace nt = nashseek::testing;

TEST_CASE("box and ball projections") {
    const auto box = ConstraintSet::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
    Vector v(2);
    v << 3.0, -0.25;
    const Vector p = box.project(v);
    CHECK(p(0) == doctest::Approx(1.0));
    CHECK(p(1) == doctest::Approx(-0.25));

    const auto ball = ConstraintSet::ball(Vector::Zero(2), 2.0);
    v << 3.0, 4.0;
    const Vector q = ball.project(v);
    CHECK(q(0) == doctest::Approx(1.2));
    CHECK(q(1) == doctest::Approx(1.6));
    CHECK(ball.contains(q));

    const auto whole = ConstraintSet::whole_space(3);
    const Vector w = Vector::Constant(3, 1e9);
    CHECK((whole.project(w) - w).norm() == 0.0);
    CHECK_FALSE(whole.bounded());
}

TEST_CASE("constraint sets reject malformed parameters") {
    Vector lo(2), hi(2);
    lo << 0.0, 1.0;
    hi << 1.0, 0.0;
    CHECK_THROWS(ConstraintSet::box(lo, hi));
    CHECK_THROWS(ConstraintSet::ball(Vector::Zero(2), 0.0));
    CHECK_THROWS(ConstraintSet::ball(Vector::Zero(2), -1.0));
}

TEST_CASE("projection is idempotent and nonexpansive") {
    std::mt19937_64 rng(11);
    const std::vector<ConstraintSet> sets{
        ConstraintSet::box(Vector::Constant(3, -0.5), Vector::Constant(3, 2.0)),
        ConstraintSet::ball(Vector::Constant(3, 0.3), 1.5), ConstraintSet::whole_space(3)};
    for (const auto& s : sets) {
        for (int t = 0; t < 200; ++t) {
            const Vector a = nt::random_vector(rng, 3, 4.0);
            const Vector b = nt::random_vector(rng, 3, 4.0);
            const Vector pa = s.project(a);
            CHECK((s.project(pa) - pa).norm() <= 1e-12);
            CHECK((pa - s.project(b)).norm() <= (a - b).norm() + 1e-12);
        }
    }
}

TEST_CASE("connectivity cost and gradient") {
    const GameDefinition g = make_connectivity_game({{-4, -8}, {-12, -3}}, 0.04);
    Vector x(4);
    x << 1.0, 2.0, 3.0, -1.0;
    CHECK(eval_cost(g, 0, x) == doctest::Approx(125.52).epsilon(1e-14));
    const Vector g0 = partial_gradient(g, 0, x);
    CHECK(g0(0) == doctest::Approx(9.84).epsilon(1e-14));
    CHECK(g0(1) == doctest::Approx(20.24).epsilon(1e-14));
    CHECK(g.mu_f() == doctest::Approx(2.0));
    CHECK(g.lip_L() == doctest::Approx(2.16));
}

TEST_CASE("analytic pseudogradient matches finite differences") {
    std::mt19937_64 rng(12);
    const GameDefinition g = nt::four_agent_game();
    for (int t = 0; t < 20; ++t) {
        const Vector x = nt::random_vector(rng, 8, 10.0);
        for (std::size_t i = 0; i < g.agent_count(); ++i) {
            const Vector a = partial_gradient(g, i, x);
            const Vector f = finite_difference_gradient(g, i, x);
            CHECK((a - f).norm() <= 1e-5 * std::max(1.0, a.norm()));
        }
    }
}

TEST_CASE("cost-only games fall back to finite differences") {
    const CostOracle cost = [](std::size_t i, const Vector& x) {
        const double other = x(1 - static_cast<Eigen::Index>(i));
        const double own = x(static_cast<Eigen::Index>(i));
        return own * own + 0.5 * own * other;
    };
    const GameDefinition g({1, 1}, cost, {}, 1.5, 2.5);
    CHECK_FALSE(g.has_gradient());
    Vector x(2);
    x << 0.7, -1.1;
    const Vector F = pseudogradient(g, x);
    CHECK(F(0) == doctest::Approx(2 * 0.7 + 0.5 * -1.1).epsilon(1e-8));
    CHECK(F(1) == doctest::Approx(2 * -1.1 + 0.5 * 0.7).epsilon(1e-8));
}

TEST_CASE("four-agent equilibrium") {
    const GameDefinition g = nt::four_agent_game();
    const Vector xs = solve_ne_oracle(g);
    CHECK((xs - nt::four_agent_ne()).norm() <= 1e-9);
    CHECK(pseudogradient(g, xs).norm() <= 1e-9);

    NeSolveOptions opt;
    opt.force_iterative = true;
    const Vector xi = solve_ne_oracle(g, opt);
    CHECK((xi - xs).norm() <= 1e-8);
}

TEST_CASE("constrained equilibrium satisfies the variational inequality") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<ConstraintSet> sets{
            ConstraintSet::box(Vector::Constant(2, -0.3), Vector::Constant(2, 0.3)),
            ConstraintSet::ball(Vector::Zero(1), 0.2)};
        const GameDefinition g = nt::random_quadratic_game(rng, {2, 1}, 0.5, 1.0, sets);
        const Vector xs = solve_ne_oracle(g, 1e-13);
        REQUIRE(g.feasible(xs));
        const Vector F = pseudogradient(g, xs);
        const ConstraintSet region =
            ConstraintSet::box(Vector::Constant(3, -0.3), Vector::Constant(3, 0.3));
        for (int t = 0; t < 100; ++t) {
            const Vector y = g.project(sample_point(region, rng));
            CHECK(F.dot(y - xs) >= -1e-9 * (y - xs).norm());
        }
    }
}

TEST_CASE("estimated constants") {
    const GameDefinition lin = make_quadratic_game({1, 1}, 2.0 * Matrix::Identity(2, 2), Vector::Zero(2));
    const auto region = ConstraintSet::box(Vector::Constant(2, -1), Vector::Constant(2, 1));
    const RegularityEstimate e = estimate_constants(lin, 50, region);
    CHECK(e.mu_hat == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(e.lip_hat == doctest::Approx(2.0).epsilon(1e-6));

    const GameDefinition conn = make_connectivity_game({{0, 0}, {1, 0}}, 0.04);
    const auto region4 = ConstraintSet::box(Vector::Constant(4, -5), Vector::Constant(4, 5));
    const RegularityEstimate c = estimate_constants(conn, 400, region4);
    CHECK(c.mu_hat >= 2.0 - 1e-6);
    CHECK(c.lip_hat <= 2.16 + 1e-6);
    CHECK(c.lip_hat >= 2.0);

    const CostOracle concave = [](std::size_t, const Vector& x) { return -x(0) * x(0); };
    const GameDefinition bad({1}, concave, {}, 1.0, 1.0);
    const auto r1 = ConstraintSet::box(Vector::Constant(1, -1), Vector::Constant(1, 1));
    CHECK_THROWS_AS(estimate_constants(bad, 20, r1), AssumptionViolation);
}

TEST_CASE("quadratic game constants from the jacobian") {
    Matrix a(2, 2);
    a << 3.0, 1.0, -1.0, 3.0;
    const GameDefinition g = make_quadratic_game({1, 1}, a, Vector::Zero(2));
    CHECK(g.mu_f() == doctest::Approx(3.0));
    CHECK(g.lip_L() == doctest::Approx(std::sqrt(10.0)));
    CHECK(g.owner(0) == 0);
    CHECK(g.owner(1) == 1);
    CHECK(g.unconstrained());
}

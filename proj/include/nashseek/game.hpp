#pragma once

// Games, pseudogradients, constraint sets and reference equilibrium solvers.
//
// Agents are indexed from 0. The collective decision vector stacks the agent
// blocks in index order, so agent i owns coordinates
// [offset(i), offset(i) + dims[i]).

#include "nashseek/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace nashseek {

class ConstraintSet {
public:
    enum class Kind { whole_space, box, ball };

    static ConstraintSet whole_space(std::size_t dim);
    static ConstraintSet box(Vector lo, Vector hi);
    static ConstraintSet ball(Vector center, double radius);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    bool bounded() const { return kind_ != Kind::whole_space; }

    const Vector& lower() const { return lo_; }
    const Vector& upper() const { return hi_; }
    const Vector& center() const { return center_; }
    double radius() const { return radius_; }

    /// Euclidean projection onto the set.
    Vector project(const Vector& v) const;
    bool contains(const Vector& v, double tol = 1e-9) const;

private:
    ConstraintSet() = default;

    Kind kind_ = Kind::whole_space;
    std::size_t dim_ = 0;
    Vector lo_, hi_;
    Vector center_;
    double radius_ = 0.0;
};

Vector project(const ConstraintSet& set, const Vector& v);

/// Cost of agent i evaluated at the collective point x.
using CostOracle = std::function<double(std::size_t agent, const Vector& x)>;
/// Partial gradient of J_i with respect to x_i, a vector of size dims[i].
using GradOracle = std::function<Vector(std::size_t agent, const Vector& x)>;

/// Pseudogradient of the form F(x) = Jac * x + shift, kept for exact solves.
struct AffinePseudogradient {
    Matrix jacobian;
    Vector shift;
};

/// Parameters of the source-seeking / connectivity game with planar agents.
struct ConnectivityParams {
    std::vector<Eigen::Vector2d> sources;
    double coupling = 0.0;
};

class GameDefinition {
public:
    GameDefinition(std::vector<std::size_t> dims, CostOracle cost,
                   std::vector<ConstraintSet> constraints, double mu_f, double lip_L,
                   GradOracle grad = {});

    std::size_t agent_count() const { return dims_.size(); }
    std::size_t dim() const { return total_dim_; }
    std::span<const std::size_t> dims() const { return dims_; }
    std::size_t agent_dim(std::size_t i) const { return dims_.at(i); }
    std::size_t offset(std::size_t i) const { return offsets_.at(i); }
    /// Agent that owns collective coordinate l.
    std::size_t owner(std::size_t coordinate) const { return owners_.at(coordinate); }

    double mu_f() const { return mu_f_; }
    double lip_L() const { return lip_L_; }

    const CostOracle& cost() const { return cost_; }
    bool has_gradient() const { return static_cast<bool>(grad_); }
    const GradOracle& gradient() const { return grad_; }

    const std::vector<ConstraintSet>& constraints() const { return constraints_; }
    bool unconstrained() const;
    /// Blockwise projection onto the product of the agents' sets.
    Vector project(const Vector& x) const;
    bool feasible(const Vector& x, double tol = 1e-9) const;

    const std::optional<AffinePseudogradient>& affine() const { return affine_; }
    const std::optional<ConnectivityParams>& connectivity() const { return connectivity_; }

    GameDefinition with_affine(AffinePseudogradient affine) const;
    GameDefinition with_connectivity(ConnectivityParams params) const;
    GameDefinition with_constraints(std::vector<ConstraintSet> constraints) const;

private:
    GameDefinition with_optional(std::optional<AffinePseudogradient> affine,
                                 std::optional<ConnectivityParams> conn) const;

    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> owners_;
    std::size_t total_dim_ = 0;
    CostOracle cost_;
    GradOracle grad_;
    std::vector<ConstraintSet> constraints_;
    double mu_f_;
    double lip_L_;
    std::optional<AffinePseudogradient> affine_;
    std::optional<ConnectivityParams> connectivity_;
};

/// J_i = ||x_i - s_i||^2 + c * sum_{j != i} ||x_i - x_j||^2, agents in R^2.
GameDefinition make_connectivity_game(std::vector<Eigen::Vector2d> sources, double coupling);

/// Quadratic game with pseudogradient F(x) = jacobian * x + shift.
///
/// Agent i's cost is 0.5 x_i' A_ii x_i + x_i' (sum_{j != i} A_ij x_j + b_i), so the
/// diagonal blocks must be symmetric. mu_f and L are computed from the
/// symmetric part and the spectral norm of the jacobian.
GameDefinition make_quadratic_game(std::vector<std::size_t> dims, Matrix jacobian, Vector shift,
                                   std::vector<ConstraintSet> constraints = {});

double eval_cost(const GameDefinition& game, std::size_t i, const Vector& x);
/// grad_{x_i} J_i(x), analytic when available, else central differences.
Vector partial_gradient(const GameDefinition& game, std::size_t i, const Vector& x);
Vector pseudogradient(const GameDefinition& game, const Vector& x);
/// Central-difference partial gradient, ignoring any analytic oracle.
Vector finite_difference_gradient(const GameDefinition& game, std::size_t i, const Vector& x);

struct NeSolveOptions {
    double tol = 1e-12;
    std::uint64_t max_iterations = 1'000'000;
    std::optional<Vector> initial;
    /// Skip the exact linear solve even when the game is affine and unconstrained.
    bool force_iterative = false;
};

/// Reference Nash equilibrium: exact linear solve for unconstrained affine
/// games, otherwise the projected pseudogradient iteration with lambda = 1 and
/// gamma = mu_f / L^2.
Vector solve_ne_oracle(const GameDefinition& game, const NeSolveOptions& options = {});
Vector solve_ne_oracle(const GameDefinition& game, double tol);

struct RegularityEstimate {
    double mu_hat;
    double lip_hat;
};

/// Sampled strong-monotonicity and Lipschitz constants of F over a bounded
/// region of R^m. Throws AssumptionViolation when mu_hat <= 0.
RegularityEstimate estimate_constants(const GameDefinition& game, std::size_t sample_count,
                                      const ConstraintSet& region, std::uint64_t seed = 1);

/// Uniform sample from a bounded set.
Vector sample_point(const ConstraintSet& region, std::mt19937_64& rng);

}  // namespace nashseek

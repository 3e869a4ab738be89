#include "nashseek/game.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nashseek {

ConstraintSet ConstraintSet::whole_space(std::size_t dim) {
    ConstraintSet set;
    set.kind_ = Kind::whole_space;
    set.dim_ = dim;
    return set;
}

ConstraintSet ConstraintSet::box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.size() == 0) {
        throw std::invalid_argument("box bounds must be non-empty and of equal size");
    }
    if ((lo.array() > hi.array()).any()) {
        throw std::invalid_argument("box requires lo <= hi componentwise");
    }
    ConstraintSet set;
    set.kind_ = Kind::box;
    set.dim_ = static_cast<std::size_t>(lo.size());
    set.lo_ = std::move(lo);
    set.hi_ = std::move(hi);
    return set;
}

ConstraintSet ConstraintSet::ball(Vector center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("ball radius must be positive and finite");
    }
    if (center.size() == 0) {
        throw std::invalid_argument("ball center must be non-empty");
    }
    ConstraintSet set;
    set.kind_ = Kind::ball;
    set.dim_ = static_cast<std::size_t>(center.size());
    set.center_ = std::move(center);
    set.radius_ = radius;
    return set;
}

Vector ConstraintSet::project(const Vector& v) const {
    if (static_cast<std::size_t>(v.size()) != dim_) {
        throw std::invalid_argument("projection: dimension mismatch");
    }
    switch (kind_) {
        case Kind::whole_space:
            return v;
        case Kind::box:
            return v.cwiseMax(lo_).cwiseMin(hi_);
        case Kind::ball: {
            const Vector d = v - center_;
            const double n = d.norm();
            if (n <= radius_) return v;
            return center_ + d * (radius_ / n);
        }
    }
    return v;
}

bool ConstraintSet::contains(const Vector& v, double tol) const {
    if (static_cast<std::size_t>(v.size()) != dim_) return false;
    switch (kind_) {
        case Kind::whole_space:
            return true;
        case Kind::box:
            return ((v.array() >= lo_.array() - tol) && (v.array() <= hi_.array() + tol)).all();
        case Kind::ball:
            return (v - center_).norm() <= radius_ + tol;
    }
    return false;
}

Vector project(const ConstraintSet& set, const Vector& v) { return set.project(v); }

GameDefinition::GameDefinition(std::vector<std::size_t> dims, CostOracle cost,
                               std::vector<ConstraintSet> constraints, double mu_f,
                               double lip_L, GradOracle grad)
    : dims_(std::move(dims)),
      cost_(std::move(cost)),
      grad_(std::move(grad)),
      constraints_(std::move(constraints)),
      mu_f_(mu_f),
      lip_L_(lip_L) {
    if (dims_.empty()) throw std::invalid_argument("game needs at least one agent");
    if (!cost_) throw std::invalid_argument("game needs a cost oracle");
    offsets_.reserve(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] == 0) throw std::invalid_argument("agent dimensions must be >= 1");
        offsets_.push_back(total_dim_);
        owners_.insert(owners_.end(), dims_[i], i);
        total_dim_ += dims_[i];
    }
    if (constraints_.empty()) {
        for (auto d : dims_) constraints_.push_back(ConstraintSet::whole_space(d));
    }
    if (constraints_.size() != dims_.size()) {
        throw std::invalid_argument("one constraint set per agent is required");
    }
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (constraints_[i].dim() != dims_[i]) {
            throw std::invalid_argument("constraint set dimension does not match agent dimension");
        }
    }
    if (!(mu_f_ > 0.0) || !(lip_L_ > 0.0)) {
        throw std::invalid_argument("mu_f and L must be positive");
    }
    if (mu_f_ > lip_L_ * (1.0 + 1e-12)) {
        throw std::invalid_argument("mu_f must not exceed L");
    }
}

bool GameDefinition::unconstrained() const {
    return std::all_of(constraints_.begin(), constraints_.end(),
                       [](const ConstraintSet& c) { return !c.bounded(); });
}

Vector GameDefinition::project(const Vector& x) const {
    Vector out(x.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        const auto o = static_cast<Eigen::Index>(offsets_[i]);
        const auto d = static_cast<Eigen::Index>(dims_[i]);
        out.segment(o, d) = constraints_[i].project(x.segment(o, d));
    }
    return out;
}

bool GameDefinition::feasible(const Vector& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != total_dim_) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        const auto o = static_cast<Eigen::Index>(offsets_[i]);
        const auto d = static_cast<Eigen::Index>(dims_[i]);
        if (!constraints_[i].contains(x.segment(o, d), tol)) return false;
    }
    return true;
}

GameDefinition GameDefinition::with_affine(AffinePseudogradient affine) const {
    GameDefinition copy = *this;
    copy.affine_ = std::move(affine);
    return copy;
}

GameDefinition GameDefinition::with_connectivity(ConnectivityParams params) const {
    GameDefinition copy = *this;
    copy.connectivity_ = std::move(params);
    return copy;
}

GameDefinition GameDefinition::with_constraints(std::vector<ConstraintSet> constraints) const {
    return GameDefinition(dims_, cost_, std::move(constraints), mu_f_, lip_L_, grad_)
        .with_optional(affine_, connectivity_);
}

GameDefinition GameDefinition::with_optional(std::optional<AffinePseudogradient> affine,
                                             std::optional<ConnectivityParams> conn) const {
    GameDefinition copy = *this;
    copy.affine_ = std::move(affine);
    copy.connectivity_ = std::move(conn);
    return copy;
}

namespace {

void check_point(const GameDefinition& game, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != game.dim()) {
        throw std::invalid_argument("point dimension does not match game dimension");
    }
    if (!x.allFinite()) throw std::invalid_argument("point has non-finite entries");
}

void check_agent(const GameDefinition& game, std::size_t i) {
    if (i >= game.agent_count()) {
        std::ostringstream msg;
        msg << "agent index " << i << " out of range (N = " << game.agent_count() << ")";
        throw std::out_of_range(msg.str());
    }
}

}  // namespace

GameDefinition make_connectivity_game(std::vector<Eigen::Vector2d> sources, double coupling) {
    if (sources.empty()) throw std::invalid_argument("connectivity game needs sources");
    if (!(coupling >= 0.0)) throw std::invalid_argument("coupling must be nonnegative");
    const std::size_t n = sources.size();
    const double c = coupling;

    auto cost = [sources, c](std::size_t i, const Vector& x) {
        const Eigen::Vector2d xi = x.segment<2>(static_cast<Eigen::Index>(2 * i));
        double j = (xi - sources[i]).squaredNorm();
        for (std::size_t k = 0; k < sources.size(); ++k) {
            if (k == i) continue;
            j += c * (xi - x.segment<2>(static_cast<Eigen::Index>(2 * k))).squaredNorm();
        }
        return j;
    };
    auto grad = [sources, c](std::size_t i, const Vector& x) -> Vector {
        const Eigen::Vector2d xi = x.segment<2>(static_cast<Eigen::Index>(2 * i));
        Eigen::Vector2d g = 2.0 * (xi - sources[i]);
        for (std::size_t k = 0; k < sources.size(); ++k) {
            if (k == i) continue;
            g += 2.0 * c * (xi - x.segment<2>(static_cast<Eigen::Index>(2 * k)));
        }
        return g;
    };

    // F(x) = (M kron I2) x - 2 s, M = (2 + 2cN) I - 2c 11'. Spectrum {2, 2 + 2cN}.
    const auto nn = static_cast<Eigen::Index>(n);
    Matrix m = (2.0 + 2.0 * c * static_cast<double>(n)) * Matrix::Identity(nn, nn) -
               2.0 * c * Matrix::Ones(nn, nn);
    Matrix jac = Matrix::Zero(2 * nn, 2 * nn);
    Vector shift(2 * nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        for (Eigen::Index k = 0; k < nn; ++k) {
            jac.block<2, 2>(2 * i, 2 * k) = m(i, k) * Eigen::Matrix2d::Identity();
        }
        shift.segment<2>(2 * i) = -2.0 * sources[static_cast<std::size_t>(i)];
    }
    const double mu = 2.0;
    const double lip = n > 1 ? 2.0 + 2.0 * c * static_cast<double>(n) : 2.0;

    GameDefinition game(std::vector<std::size_t>(n, 2), cost, {}, mu, lip, grad);
    return game.with_affine({std::move(jac), std::move(shift)})
        .with_connectivity({std::move(sources), coupling});
}

GameDefinition make_quadratic_game(std::vector<std::size_t> dims, Matrix jacobian, Vector shift,
                                   std::vector<ConstraintSet> constraints) {
    const std::size_t m = std::accumulate(dims.begin(), dims.end(), std::size_t{0});
    const auto mm = static_cast<Eigen::Index>(m);
    if (jacobian.rows() != mm || jacobian.cols() != mm || shift.size() != mm) {
        throw std::invalid_argument("quadratic game: jacobian/shift size mismatch");
    }
    std::vector<std::size_t> offsets;
    std::size_t acc = 0;
    for (auto d : dims) {
        offsets.push_back(acc);
        acc += d;
    }
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto o = static_cast<Eigen::Index>(offsets[i]);
        const auto d = static_cast<Eigen::Index>(dims[i]);
        const Matrix block = jacobian.block(o, o, d, d);
        if ((block - block.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + block.norm())) {
            throw std::invalid_argument("quadratic game: diagonal blocks must be symmetric");
        }
    }
    const Matrix sym = 0.5 * (jacobian + jacobian.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const double mu = eig.eigenvalues().minCoeff();
    Eigen::JacobiSVD<Matrix> svd(jacobian);
    const double lip = svd.singularValues()(0);
    if (!(mu > 0.0)) {
        throw AssumptionViolation("quadratic game: jacobian is not strongly monotone");
    }

    auto cost = [dims, offsets, jacobian, shift](std::size_t i, const Vector& x) {
        const auto o = static_cast<Eigen::Index>(offsets[i]);
        const auto d = static_cast<Eigen::Index>(dims[i]);
        const Vector xi = x.segment(o, d);
        const Matrix& a = jacobian;
        const Vector others = a.middleRows(o, d) * x - a.block(o, o, d, d) * xi;
        return 0.5 * xi.dot(a.block(o, o, d, d) * xi) + xi.dot(others + shift.segment(o, d));
    };
    auto grad = [dims, offsets, jacobian, shift](std::size_t i, const Vector& x) -> Vector {
        const auto o = static_cast<Eigen::Index>(offsets[i]);
        const auto d = static_cast<Eigen::Index>(dims[i]);
        return jacobian.middleRows(o, d) * x + shift.segment(o, d);
    };
    GameDefinition game(dims, cost, std::move(constraints), mu, std::max(lip, mu), grad);
    return game.with_affine({std::move(jacobian), std::move(shift)});
}

double eval_cost(const GameDefinition& game, std::size_t i, const Vector& x) {
    check_agent(game, i);
    check_point(game, x);
    const double j = game.cost()(i, x);
    if (!std::isfinite(j)) throw Error("cost oracle returned a non-finite value");
    return j;
}

Vector finite_difference_gradient(const GameDefinition& game, std::size_t i, const Vector& x) {
    check_agent(game, i);
    check_point(game, x);
    const double h = 1e-6 * std::max(1.0, x.norm());
    const auto o = static_cast<Eigen::Index>(game.offset(i));
    const auto d = static_cast<Eigen::Index>(game.agent_dim(i));
    Vector g(d);
    Vector probe = x;
    for (Eigen::Index l = 0; l < d; ++l) {
        probe(o + l) = x(o + l) + h;
        const double up = game.cost()(i, probe);
        probe(o + l) = x(o + l) - h;
        const double down = game.cost()(i, probe);
        probe(o + l) = x(o + l);
        g(l) = (up - down) / (2.0 * h);
    }
    if (!g.allFinite()) throw Error("finite-difference gradient is not finite; ill-posed cost");
    return g;
}

Vector partial_gradient(const GameDefinition& game, std::size_t i, const Vector& x) {
    if (!game.has_gradient()) return finite_difference_gradient(game, i, x);
    check_agent(game, i);
    check_point(game, x);
    Vector g = game.gradient()(i, x);
    if (static_cast<std::size_t>(g.size()) != game.agent_dim(i)) {
        throw std::logic_error("gradient oracle returned a vector of the wrong size");
    }
    if (!g.allFinite()) throw Error("gradient oracle returned a non-finite value");
    return g;
}

Vector pseudogradient(const GameDefinition& game, const Vector& x) {
    check_point(game, x);
    Vector f(x.size());
    for (std::size_t i = 0; i < game.agent_count(); ++i) {
        f.segment(static_cast<Eigen::Index>(game.offset(i)),
                  static_cast<Eigen::Index>(game.agent_dim(i))) = partial_gradient(game, i, x);
    }
    return f;
}

Vector solve_ne_oracle(const GameDefinition& game, const NeSolveOptions& options) {
    const auto m = static_cast<Eigen::Index>(game.dim());
    if (game.affine() && game.unconstrained() && !options.force_iterative) {
        const auto& aff = *game.affine();
        Vector x = aff.jacobian.partialPivLu().solve(-aff.shift);
        if (!x.allFinite()) throw ConvergenceFailure("linear NE solve produced non-finite values");
        return x;
    }

    const double gamma = game.mu_f() / (game.lip_L() * game.lip_L());
    Vector x = options.initial ? game.project(*options.initial) : game.project(Vector::Zero(m));
    for (std::uint64_t it = 0; it < options.max_iterations; ++it) {
        Vector next = game.project(x - gamma * pseudogradient(game, x));
        const double step = (next - x).norm();
        x = std::move(next);
        if (step <= options.tol) return x;
        if (!x.allFinite() || x.norm() > 1e12) break;
    }
    throw ConvergenceFailure(
        "NE iteration did not converge within the iteration budget; check mu_f and L");
}

Vector solve_ne_oracle(const GameDefinition& game, double tol) {
    NeSolveOptions options;
    options.tol = tol;
    return solve_ne_oracle(game, options);
}

Vector sample_point(const ConstraintSet& region, std::mt19937_64& rng) {
    const auto d = static_cast<Eigen::Index>(region.dim());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (region.kind()) {
        case ConstraintSet::Kind::box: {
            Vector v(d);
            for (Eigen::Index l = 0; l < d; ++l) {
                v(l) = region.lower()(l) + unit(rng) * (region.upper()(l) - region.lower()(l));
            }
            return v;
        }
        case ConstraintSet::Kind::ball: {
            std::normal_distribution<double> normal(0.0, 1.0);
            Vector dir(d);
            for (Eigen::Index l = 0; l < d; ++l) dir(l) = normal(rng);
            const double n = dir.norm();
            if (n == 0.0) return region.center();
            const double rad = region.radius() * std::pow(unit(rng), 1.0 / static_cast<double>(d));
            return region.center() + dir * (rad / n);
        }
        case ConstraintSet::Kind::whole_space:
            break;
    }
    throw std::invalid_argument("cannot sample from an unbounded region");
}

RegularityEstimate estimate_constants(const GameDefinition& game, std::size_t sample_count,
                                      const ConstraintSet& region, std::uint64_t seed) {
    if (sample_count < 2) throw std::invalid_argument("estimate_constants needs >= 2 samples");
    if (region.dim() != game.dim()) {
        throw std::invalid_argument("sampling region must live in the collective space");
    }
    std::mt19937_64 rng(seed);
    std::vector<Vector> xs;
    std::vector<Vector> fs;
    xs.reserve(sample_count);
    fs.reserve(sample_count);
    for (std::size_t s = 0; s < sample_count; ++s) {
        xs.push_back(sample_point(region, rng));
        fs.push_back(pseudogradient(game, xs.back()));
    }
    double mu_hat = std::numeric_limits<double>::infinity();
    double lip_hat = 0.0;
    for (std::size_t a = 0; a < sample_count; ++a) {
        for (std::size_t b = a + 1; b < sample_count; ++b) {
            const Vector dx = xs[a] - xs[b];
            const double n2 = dx.squaredNorm();
            if (n2 == 0.0) continue;
            const Vector df = fs[a] - fs[b];
            mu_hat = std::min(mu_hat, dx.dot(df) / n2);
            lip_hat = std::max(lip_hat, df.norm() / std::sqrt(n2));
        }
    }
    if (!(mu_hat > 0.0)) {
        std::ostringstream msg;
        msg << "sampled pseudogradient is not strongly monotone on the region (mu_hat = "
            << mu_hat << ")";
        throw AssumptionViolation(msg.str());
    }
    return {mu_hat, lip_hat};
}

}  // namespace nashseek

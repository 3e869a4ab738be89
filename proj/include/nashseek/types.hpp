#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace nashseek {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for failures that are findings about the problem data rather
/// than programming errors (bad constants, violated assumptions, divergence).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A standing assumption of the method does not hold for the supplied data.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// An iterative procedure exhausted its budget or diverged.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace nashseek

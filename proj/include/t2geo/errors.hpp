#pragma once

#include <stdexcept>
#include <string>

namespace t2geo {

/// Expression evaluation hit a singularity (log of a nonpositive value,
/// division by zero, fractional power of a nonpositive base, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed expression source. `position` is a 0-based byte offset.
struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
};

/// Variable index out of range for the configured dimension.
struct IndexError : ParseError {
    using ParseError::ParseError;
};

/// The y2-Hessian of the Lagrangian is numerically singular.
struct DegenerateLagrangian : std::runtime_error {
    double rcond;
    explicit DegenerateLagrangian(double rc)
        : std::runtime_error("degenerate Lagrangian: reciprocal condition number " +
                             std::to_string(rc)),
          rcond(rc) {}
};

/// A base metric g(x) is singular at the queried point.
struct SingularMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Jacobian of a coordinate change is singular at the queried point.
struct SingularJacobian : std::runtime_error {
    double det;
    explicit SingularJacobian(double d)
        : std::runtime_error("singular Jacobian: |det| = " + std::to_string(d)), det(d) {}
};

/// Invalid run configuration; `field` names the offending entry.
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(const std::string& fld, const std::string& msg)
        : std::runtime_error("config error in '" + fld + "': " + msg), field(fld) {}
};

/// Integration produced a nonfinite state.
struct StepError : std::runtime_error {
    double t;
    explicit StepError(double time)
        : std::runtime_error("nonfinite state at t = " + std::to_string(time)), t(time) {}
};

} // namespace t2geo

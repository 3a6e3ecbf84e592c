#ifndef MOCAM_ERRORS_HPP
#define MOCAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mocam {

/// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Geometric or camouflage-domain violation (degenerate inputs, k > 1, off-line points).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Numerical singularity encountered at a known time (target through the static
/// point, vanishing line-of-sight, and similar). Carries the time of failure.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double t)
        : Error(what + " (t = " + std::to_string(t) + " s)"), time(t) {}
    double time;
};

/// Scenario configuration problems; message lists every violated field.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

} // namespace mocam

#endif

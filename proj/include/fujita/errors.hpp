#pragma once

#include <stdexcept>
#include <string>

namespace fujita {

/// Invalid input: malformed documents, out-of-range parameters, violated
/// preconditions. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to deliver a trustworthy result
/// (quadrature non-convergence, root-finding failure). Maps to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the time stepper when the field escapes the blow-up threshold
/// or turns non-finite. Carries the last time at which the state was finite.
class BlowupDetected : public std::runtime_error {
public:
    BlowupDetected(double last_finite_time, const std::string& what)
        : std::runtime_error(what), time_(last_finite_time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace fujita

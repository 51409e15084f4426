// errors.hpp: exception types shared by all cqd modules

#pragma once

#include <stdexcept>
#include <string>

namespace cqd {

// Bad parameters, malformed grids, mismatched inputs.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Ground state requested at a zero-gap point of a Bloch Hamiltonian.
class DegenerateHamiltonian : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Formula or special function evaluated outside its domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ODE integration could not advance; carries the time where it stalled.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t)
        : std::runtime_error(what + " (t = " + std::to_string(t) + ")"), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace cqd

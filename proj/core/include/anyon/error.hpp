#pragma once

#include <stdexcept>
#include <string>

namespace anyon {

// Base of every error raised by the library. Suites catch this type and
// record the message in the run manifest instead of aborting sibling cells.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A length scale (smearing radius, perturbation width) is not resolved by
// the grid it is sampled on.
class ResolutionError : public Error {
public:
    using Error::Error;
};

// Root bracket does not straddle a sign change.
class BracketError : public Error {
public:
    using Error::Error;
};

// Iterative method hit its cap or broke down.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Invalid argument to a numerical routine (p <= 2, too few data points, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Experiment configuration failed validation. `path` names the offending
// JSON field, e.g. "/schedule/tol".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace anyon

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "saddlelab/types.hpp"

namespace saddlelab {

/// Base of every error raised by the library. `kind()` is the stable,
/// machine-readable name used in CLI diagnostics.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
};

class NotCritical : public Error {
public:
    explicit NotCritical(double grad_norm);
    const char* kind() const noexcept override { return "NotCritical"; }
    double grad_norm() const noexcept { return grad_norm_; }

private:
    double grad_norm_;
};

/// Raised when a normalized field is requested at (numerically) a critical
/// point, i.e. at the end of the maximal interval of existence.
class CriticalPointReached : public Error {
public:
    explicit CriticalPointReached(Point at);
    const char* kind() const noexcept override { return "CriticalPointReached"; }
    const Point& point() const noexcept { return point_; }

private:
    Point point_;
};

class IntegrationFailure : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "IntegrationFailure"; }
};

class OutOfRange : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "OutOfRange"; }
};

class InvalidC : public Error {
public:
    explicit InvalidC(double C);
    const char* kind() const noexcept override { return "InvalidC"; }
};

class NeverEntered : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NeverEntered"; }
};

class BoundViolated : public Error {
public:
    BoundViolated(Point ic, double occupancy, double bound);
    const char* kind() const noexcept override { return "BoundViolated"; }
    const Point& initial_condition() const noexcept { return ic_; }
    double occupancy() const noexcept { return occupancy_; }
    double bound() const noexcept { return bound_; }

private:
    Point ic_;
    double occupancy_;
    double bound_;
};

class AssumptionViolated : public Error {
public:
    AssumptionViolated(int assumption, const std::string& detail);
    const char* kind() const noexcept override { return "AssumptionViolated"; }
    int assumption() const noexcept { return assumption_; }

private:
    int assumption_;
};

/// Malformed configuration or function spec. `position` is the character
/// offset of the offending token when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg, std::size_t position = npos);
    const char* kind() const noexcept override { return "ConfigError"; }
    std::size_t position() const noexcept { return position_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t position_;
};

class IOError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "IOError"; }
};

}  // namespace saddlelab

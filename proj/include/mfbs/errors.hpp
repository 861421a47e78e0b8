#pragma once

#include <stdexcept>
#include <string>

namespace mfbs {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad arguments: dimension mismatches, out-of-range parameters, malformed inputs.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A declared model violates its own contract (e.g. a Hurst functional leaving (0,1)).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to converge within the configured panel budget.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& msg, double panel_lo, double panel_hi, double panel_err)
        : Error(msg), worst_panel_lo(panel_lo), worst_panel_hi(panel_hi), worst_panel_error(panel_err) {}
    double worst_panel_lo;
    double worst_panel_hi;
    double worst_panel_error;
};

/// Matrix conditioning failure beyond the jitter policy.
class ConditioningError : public Error {
public:
    using Error::Error;
};

/// A relation that must hold by construction failed numerically.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

/// Bad configuration of a sampler or experiment (e.g. noise window too small).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Malformed or non-validating manifest / file format.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace mfbs

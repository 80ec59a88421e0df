#pragma once

#include <stdexcept>
#include <string>

namespace impest {

struct InvalidArg : std::invalid_argument {
    explicit InvalidArg(const std::string& msg) : std::invalid_argument(msg) {}
};

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& msg) : std::invalid_argument(msg) {}
};

struct NotHermitian : std::runtime_error {
    explicit NotHermitian(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPSD : std::runtime_error {
    explicit NotPSD(const std::string& msg) : std::runtime_error(msg) {}
};

struct OptimizerFailure : std::runtime_error {
    explicit OptimizerFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularCovariance : std::runtime_error {
    explicit SingularCovariance(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace impest

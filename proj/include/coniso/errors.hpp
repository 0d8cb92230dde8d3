#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coniso {

// Configuration / input deserialization problems. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A solver hypothesis fails (e.g. the spectral gap lambda_1(-Delta_L) > m-1
// required for the linearized operator to be invertible). CLI exit code 3.
class HypothesisError : public std::runtime_error {
public:
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// Newton or eigensolver failure. Carries the residual history when available.
// CLI exit code 1.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> residuals = {})
        : std::runtime_error(what), residual_history(std::move(residuals)) {}
    std::vector<double> residual_history;
};

// Two routes that must agree by theory disagree numerically; signals a
// discretization failure rather than bad input.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coniso

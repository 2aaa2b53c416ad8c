#pragma once

#include <stdexcept>
#include <string>

namespace dgobs {

struct InvalidDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mesh conformity violation; the message names the offending edge.
struct TopologyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FeasibilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dgobs

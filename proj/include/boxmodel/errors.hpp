#pragma once

#include <stdexcept>
#include <string>

namespace boxmodel {

/// Argument outside the mathematical domain of an operation (negative density, ρ ≥ 1/b, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Model or run configuration that cannot be used (α ≥ α_max, bad block divisibility, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Enumeration or table request beyond the supported state-space size.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// φ_λ is single-welled for every λ in the search range.
class NoCoexistenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The supplied superstability witness is not dominated by the potential.
class WitnessRejectedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace boxmodel

#pragma once

#include <stdexcept>
#include <string>

namespace mfgn {

/// Bad user input: malformed config files, invalid resolutions, assumption
/// violations in the problem data. Messages name the violated requirement.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal API misuse: shape mismatches, missing boundary data, fields on
/// the wrong grid. These indicate caller bugs, not bad data.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// A numerical procedure failed after its safeguards (root find divergence,
/// factorization failure, detected solver divergence).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mfgn

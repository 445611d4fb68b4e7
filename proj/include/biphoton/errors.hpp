#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

/// Raised when a scenario file or a parameter set fails validation.
/// `field()` names the offending entry for CLI diagnostics.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    explicit ConfigError(const std::string& what) : ConfigError("", what) {}
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// Raised when an input object violates its type invariants
/// (e.g. a density matrix that is negative beyond tolerance).
class ValidityError : public std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace biphoton

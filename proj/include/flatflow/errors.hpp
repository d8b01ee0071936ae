#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flatflow {

/// Invalid run description or grid/model parameters. Carries every violated
/// rule so callers can report them all at once.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& rule)
      : std::invalid_argument(rule), rules_{rule} {}
  explicit ConfigError(std::vector<std::string> rules)
      : std::invalid_argument(join(rules)), rules_(std::move(rules)) {}

  const std::vector<std::string>& rules() const { return rules_; }

 private:
  static std::string join(const std::vector<std::string>& rules) {
    std::string out;
    for (const auto& r : rules) {
      if (!out.empty()) out += "; ";
      out += r;
    }
    return out;
  }
  std::vector<std::string> rules_;
};

/// Evaluation outside the region where a quantity is defined (negative shear
/// argument, interface leaving the strip, interpolation outside samples).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear-algebra failure tied to physical parameters (singular block).
class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial data violating the compatibility conditions of the linear problem.
class IncompatibleData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flatflow

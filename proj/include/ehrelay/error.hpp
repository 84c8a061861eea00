#ifndef EHRELAY_ERROR_HPP
#define EHRELAY_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ehrelay {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration. Carries one entry per offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> items)
      : Error(join(items)), items_(std::move(items)) {}

  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }

  std::vector<std::string> items_;
};

class GeometryError : public Error {
 public:
  GeometryError() : Error("degenerate geometry") {}
};

/// A debit exceeded the energy stored in a relay. Always a scheduler bug.
class CausalityViolation : public Error {
 public:
  using Error::Error;
};

/// Relay cannot reach the requested utility even at peak power.
class NotCandidate : public Error {
 public:
  using Error::Error;
};

class SolverStall : public Error {
 public:
  using Error::Error;
};

class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace ehrelay

#endif  // EHRELAY_ERROR_HPP

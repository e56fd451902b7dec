#pragma once

// Error taxonomy.  UsageError covers bad inputs, malformed files, and
// unsupported operation/backend combinations; it maps to CLI exit code 2.
// Mathematical failures (an inequality that does not hold) are never
// exceptions: they are reported with pass=false and exit code 1.

#include <stdexcept>
#include <string>

namespace cotype {

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class UnsupportedError : public UsageError {
 public:
  explicit UnsupportedError(const std::string& what) : UsageError(what) {}
};

class BudgetError : public UsageError {
 public:
  explicit BudgetError(const std::string& what) : UsageError(what) {}
};

}  // namespace cotype

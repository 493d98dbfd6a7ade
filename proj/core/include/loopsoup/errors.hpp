#pragma once

#include <stdexcept>
#include <string>

namespace loopsoup {

// An iterative scheme exhausted its budget before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A diagnostic was requested on data that cannot support it (e.g. a
// contraction-ratio estimate from a run that converged in two steps).
class InsufficientDataError : public std::runtime_error {
 public:
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

// Arguments lie outside the validity regime of an asymptotic formula.
class RegimeError : public std::domain_error {
 public:
  explicit RegimeError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace loopsoup

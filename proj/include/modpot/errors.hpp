#pragma once

#include <stdexcept>
#include <string>

namespace modpot {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed system or scenario data (non-SPD form, bad dimensions, bad file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The problem instance admits no solution of the requested kind.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method ran out of iterations or subdivisions.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken numerical invariant; indicates a bug or corrupted input data.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace modpot

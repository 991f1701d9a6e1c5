#pragma once

#include <stdexcept>
#include <string>

namespace pepls {

// Bad arguments or malformed input data.
struct InputError : std::invalid_argument {
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A runtime contract was violated (e.g. a direction policy leaving its
// tolerance ball, or an operation called on a non-optimal solution).
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Called in a state where the operation is undefined (non-optimal solution,
// unsolved problem, ...).
struct StateError : std::logic_error {
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Numerical breakdown: indefinite matrices, failed factorizations, ...
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pepls

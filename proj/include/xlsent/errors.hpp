#pragma once

#include <stdexcept>
#include <string>

namespace xlsent {

// Malformed or inconsistent input data (bad corpus records, mismatched
// plans, missing labels). CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (non-finite loss, solver non-convergence, degenerate
// statistics). CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xlsent

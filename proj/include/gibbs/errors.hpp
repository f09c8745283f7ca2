#pragma once

#include <stdexcept>
#include <string>

namespace gibbs {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameter or argument combination (bad sigma, k > n, ...).
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (CSV parse, constraint violations).
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numeric failure: truncation tolerance unreachable, no solution in bracket,
// optimizer non-convergence, irrecoverable cancellation.
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace gibbs

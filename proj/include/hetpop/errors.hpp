#pragma once

#include <stdexcept>
#include <string>

namespace hetpop {

// Parameter outside its admissible range (q, lambda, phi, omega, n, nruns...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Input data that cannot be used: unreadable, non-numeric, too few rows.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically degenerate input: constant columns, |r| close to 1, singular
// factor correlation.
class DegenerateError : public std::runtime_error {
 public:
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hetpop

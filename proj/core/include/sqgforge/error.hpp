#pragma once

#include <stdexcept>
#include <string>

namespace sqgforge {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rejected input: violated precondition, bad range, malformed config.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// File or stream problem.
class IoError : public Error {
  public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// A coefficient solve left the admissible ball of the geometric lemma.
/// Carries the offending coefficient and, when known, the grid point.
class OutOfBallError : public Error {
  public:
    OutOfBallError(const std::string& msg, int coeff_index, double coeff_value,
                   long long grid_index = -1)
        : Error(msg), coeff_index(coeff_index), coeff_value(coeff_value),
          grid_index(grid_index) {}

    int coeff_index;
    double coeff_value;
    long long grid_index;
};

}  // namespace sqgforge

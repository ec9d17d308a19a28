#pragma once

#include <stdexcept>
#include <string>

namespace cran {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The quasi-definite KKT matrix could not be factored.
class FactorizationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cran

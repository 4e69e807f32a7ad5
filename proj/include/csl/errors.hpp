#pragma once

#include <stdexcept>

namespace csl {

/// Input geometry cannot determine the requested quantity.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csl

#pragma once

#include <stdexcept>
#include <string>

namespace fclab {

// Series or iteration did not reach the requested tolerance. Carries the
// partial value and the residual bound at the point of giving up.
class convergence_error : public std::runtime_error {
public:
  convergence_error(const std::string& what, double partial, double bound)
      : std::runtime_error(what), partial_value(partial), residual_bound(bound) {}

  double partial_value;
  double residual_bound;
};

class singularity_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class precondition_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fclab

#ifndef UNIQSET_ERRORS_HPP
#define UNIQSET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace uniqset {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad numeric input (delta out of range, N < 1, ...)
struct ParameterError : Error {
  using Error::Error;
};

struct DegenerateSetError : Error {
  using Error::Error;
};

// beta*p <= 1 with a nonzero constant
struct DivergentTailError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

// test measure / witness not inside E
struct SupportViolation : Error {
  using Error::Error;
};

// search caps, grid resolution, overflow guards
struct ResourceError : Error {
  using Error::Error;
};

}  // namespace uniqset

#endif

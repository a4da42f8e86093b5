#pragma once

#include <stdexcept>
#include <string>

namespace remkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model or operation parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Requested state space exceeds the enumeration cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A truncated point process left more tail mass than the caller tolerates.
class TailTooLargeError : public Error {
 public:
  using Error::Error;
};

// Closed-form bound requested for parameters without strictly ordered
// kappa_i / a_i.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace remkit

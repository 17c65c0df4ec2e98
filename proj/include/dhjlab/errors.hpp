#pragma once

#include <stdexcept>
#include <string>

namespace dhjlab {

/// Raised for malformed inputs and violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Conditioning on an event of zero mass.
class EmptyCondition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed the configured budget; caller should sample instead.
class FallbackToSampling : public std::runtime_error {
 public:
  FallbackToSampling(const std::string& what, double work)
      : std::runtime_error(what), estimated_work(work) {}
  double estimated_work;
};

}  // namespace dhjlab

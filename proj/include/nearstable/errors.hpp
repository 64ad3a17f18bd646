#pragma once

#include <stdexcept>
#include <string>

namespace nearstable {

/// Invalid parameters or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation produced a non-finite state. The CLI maps this to exit code 3.
class NumericAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nearstable

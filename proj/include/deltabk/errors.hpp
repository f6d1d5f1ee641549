#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deltabk {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed expression or config text. `offset` is a byte offset into the
// offending source string.
struct SyntaxError : Error {
  std::size_t offset;
  SyntaxError(const std::string& message, std::size_t offset_)
      : Error(message), offset(offset_) {}
};

// An expression referenced a name with no binding.
struct UnboundVariableError : Error {
  std::string name;
  explicit UnboundVariableError(const std::string& name_)
      : Error("unbound variable '" + name_ + "'"), name(name_) {}
};

// Evaluation left the mathematical domain: ln of a nonpositive value, cot at
// a zero of sin, a vanishing gain, a non-finite result, and so on.
struct DomainError : Error {
  using Error::Error;
};

// A config file violated the schema or an invariant checked at load time.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace deltabk

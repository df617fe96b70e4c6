#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spinweb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range or malformed user parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (wrong variant, mismatched
// lattices, non-dominant decimation, disconnected graph, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spinweb

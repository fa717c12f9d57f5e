#pragma once

#include <stdexcept>
#include <string>

namespace lipuq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, bad range).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// The data, Lipschitz constants and mean constraint admit no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace lipuq

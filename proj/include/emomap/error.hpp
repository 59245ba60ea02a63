#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emomap {

enum class ErrorKind {
  Configuration,
  Parse,
  Validation,
  EmptyAlignment,
  Contract,
  Degenerate,
  Domain,
  Divergence,
  EmptyOutput,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure surfaced by the library. The kind
/// decides how the CLI maps it onto an exit code.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class DivergenceError : public Error {
public:
  DivergenceError(long iteration, const std::string& message)
      : Error(ErrorKind::Divergence, message), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

private:
  long iteration_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::Contract, message);
}

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::EmptyAlignment: return "empty-alignment";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Degenerate: return "degenerate-input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::EmptyOutput: return "empty-output";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace emomap

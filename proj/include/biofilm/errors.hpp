#pragma once

#include <stdexcept>
#include <string>

namespace biofilm {

enum class ErrorKind {
  NoAttachment,
  NonConvergence,
  SingularJacobian,
  CflViolation,
  NumericalBlowup,
  OutOfDomain,
  UnknownPreset,
  IoFailure,
  InvalidConfig,
  ParseError,
};

const char* to_string(ErrorKind kind);

/// Single exception type for all solver and I/O failures; `kind()` lets
/// callers (the CLI in particular) map failures onto exit codes.
class BiofilmError : public std::runtime_error {
public:
  BiofilmError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace biofilm

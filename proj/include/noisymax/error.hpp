#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noisymax {

enum class ErrorKind {
  Syntax,
  Cycle,
  DanglingReference,
  MalformedDistribution,
  InvalidArgument,
  OutOfRange,
  GuardExceeded,
  ZeroNormalization,
  NumericalUnderflow,
  NegativePosterior,
  AgreementFailure,
  Io,
};

/// Stable machine-readable tag, e.g. "cycle" or "guard-exceeded".
std::string_view to_string(ErrorKind kind);

/// Every failure the library reports carries a kind so callers (and the CLI)
/// can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace noisymax

#include "noisymax/error.hpp"

namespace noisymax {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Cycle: return "cycle";
    case ErrorKind::DanglingReference: return "dangling-reference";
    case ErrorKind::MalformedDistribution: return "malformed-distribution";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::GuardExceeded: return "guard-exceeded";
    case ErrorKind::ZeroNormalization: return "zero-normalization";
    case ErrorKind::NumericalUnderflow: return "numerical-underflow";
    case ErrorKind::NegativePosterior: return "negative-posterior";
    case ErrorKind::AgreementFailure: return "agreement-failure";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace noisymax

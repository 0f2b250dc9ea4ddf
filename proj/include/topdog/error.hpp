#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topdog {

enum class ErrorCode {
  MalformedRow,
  OversoldProduct,
  UnknownPair,
  EmptyUniverse,
  NoSales,
  ZeroSupply,
  BranchSetMismatch,
  NonPositiveDampening,
  TooFewBranches,
  DegenerateTdis,
  NegativeShare,
  ZeroMass,
  InvalidConfig,
  Io,
};

std::string_view error_name(ErrorCode code);

/// Domain failure raised by the library. The code identifies the error class
/// named in the file formats and command contracts; `what()` carries detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace topdog

#include "topdog/error.hpp"

namespace topdog {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::OversoldProduct: return "OversoldProduct";
    case ErrorCode::UnknownPair: return "UnknownPair";
    case ErrorCode::EmptyUniverse: return "EmptyUniverse";
    case ErrorCode::NoSales: return "NoSales";
    case ErrorCode::ZeroSupply: return "ZeroSupply";
    case ErrorCode::BranchSetMismatch: return "BranchSetMismatch";
    case ErrorCode::NonPositiveDampening: return "NonPositiveDampening";
    case ErrorCode::TooFewBranches: return "TooFewBranches";
    case ErrorCode::DegenerateTdis: return "DegenerateTdis";
    case ErrorCode::NegativeShare: return "NegativeShare";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "IoError";
  }
  return "UnknownError";
}

}  // namespace topdog

#include "ambres/errors.hpp"

namespace ambres {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::IntegerOverflow: return "IntegerOverflow";
    case ErrorCode::NotUnimodular: return "NotUnimodular";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::InvalidProposal: return "InvalidProposal";
    case ErrorCode::EmptyNeighborSet: return "EmptyNeighborSet";
    case ErrorCode::OptimizationDiverged: return "OptimizationDiverged";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::NonStationary: return "NonStationary";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::IntegerOverflow:
    case ErrorCode::CapacityExceeded:
    case ErrorCode::NoRoot:
    case ErrorCode::InvalidProposal:
    case ErrorCode::EmptyNeighborSet:
    case ErrorCode::OptimizationDiverged:
    case ErrorCode::DegenerateModel:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace ambres

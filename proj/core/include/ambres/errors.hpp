#pragma once

#include <stdexcept>
#include <string>

namespace ambres {

enum class ErrorCode {
  NotPositiveDefinite,
  DimensionMismatch,
  AsymmetricInput,
  IntegerOverflow,
  NotUnimodular,
  CapacityExceeded,
  NoRoot,
  InvalidProposal,
  EmptyNeighborSet,
  OptimizationDiverged,
  Unsupported,
  NonStationary,
  DegenerateModel,
  InvalidInput,
  ParseError,
};

const char* to_string(ErrorCode code);

// Numerical failures map to exit status 3 in the CLI, everything else to 2.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ambres

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace idealconv {

enum class ErrorCode {
  InvalidArgument,
  HorizonExceeded,
  DepthExceeded,
  UnknownIdeal,
  NotRepresentable,
  BlockSearchExceeded,
  WitnessRefuted,
  NotAnalyticP,
  ExhaustedA,
  NotALimitPoint,
  HypothesisFailed,
  BijectivityOverflow,
  SupplyExhausted,
  MassUnavailable,
};

std::string_view to_string(ErrorCode code);

// Single exception type; the code is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace idealconv

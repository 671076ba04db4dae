#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riskswitch {

enum class ErrorCode {
  ZeroProbability,
  NonNormalized,
  InvalidPartition,
  NotRefining,
  NotAdapted,
  NotAStoppingTime,
  TooLarge,
  DivergentBound,
  AssumptionFailed,
  InvalidArgument,
  Schema,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define RISKSWITCH_REQUIRE(cond, code, msg)            \
  do {                                                 \
    if (!(cond)) throw ::riskswitch::Error((code), (msg)); \
  } while (false)

}  // namespace riskswitch

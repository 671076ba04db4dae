#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace riskswitch::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;         // bad flags, invalid arguments
inline constexpr int kSchema = 2;        // malformed input document
inline constexpr int kVerification = 3;  // a verification failed or an assumption does not hold
inline constexpr int kGuard = 4;         // TooLarge or DivergentBound

// args excludes the program name. JSON goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riskswitch::cli

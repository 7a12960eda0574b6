#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npgi::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,           // bad flags or configuration
    kBadInput = 2,        // unreadable or invalid problem / policy file
    kLimitExceeded = 3,   // enumeration or memory cap
    kTimeLimit = 4,
};

/// Accepts "90", "90s", "1.5m", "2h" and returns seconds.
std::optional<double> parse_duration(std::string_view text);

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace npgi::cli

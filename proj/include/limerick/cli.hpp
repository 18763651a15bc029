#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace limerick {

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point behind the binary. Exit status: 0 success, 1 domain failure
/// (generation, validation, scoring backend), 2 usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace limerick

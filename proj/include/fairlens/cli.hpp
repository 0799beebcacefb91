#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairlens {

// Runs one command given argv-style arguments (program name excluded).
// Returns the process exit code: 0 success, 1 unexpected failure, 2 usage
// error, 3 invalid input, 4 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace fairlens

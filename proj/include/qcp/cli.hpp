#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcp::cli {

inline constexpr const char * tool_version = "1.0.0";

/// Process exit codes.
enum ExitCode : int
{
    exit_ok = 0,    ///< success; for solve, a completion was found
    exit_usage = 2, ///< bad command line
    exit_data = 3,  ///< unreadable, malformed or unusable input data
    exit_unsat = 10,
    exit_cutoff = 11,
};

/// Runs one command line (without the program name) and returns its exit code.
auto run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err) -> int;

} // namespace qcp::cli

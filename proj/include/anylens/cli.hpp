#pragma once

#include <iosfwd>

namespace anylens
{

enum ExitCode
{
    kExitOk            = 0,
    kExitFindings      = 1,
    kExitUsage         = 2,
    kExitParseFailures = 3,
};

/// Entry point of the `anylens` tool. Writes results to `out` (unless
/// --output is given) and diagnostics to `err`.
int run_cli( int argc, const char* const* argv, std::ostream& out, std::ostream& err );

}  // namespace anylens

#pragma once

#include <iosfwd>

namespace nashseek {

/// Subcommands: run, ne, schedule, validate-freqs, avg, plot. Returns the
/// process exit code; errors are reported on err.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nashseek

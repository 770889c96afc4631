#ifndef SAASQUAL_CLI_HPP
#define SAASQUAL_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace saasqual::cli {

/// Exit codes returned by run().
enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

/**
 * Runs one subcommand (validate, fit, sweep, evaluate, recommend, synth).
 * `args` excludes the program name. Results go to files or `out`,
 * diagnostics to `err`. Output files are written to a temporary name and
 * renamed into place.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace saasqual::cli

#endif

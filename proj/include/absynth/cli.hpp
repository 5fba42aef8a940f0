// Command-line driver: validate | check | synth | certify.

#ifndef ABSYNTH_CLI_HPP
#define ABSYNTH_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace absynth {

// Exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 1,       // unreadable or unparsable input
    kExitInvalid = 2,     // validation violations
    kExitRefuted = 3,     // a check failed or synthesis is impossible
    kExitInconclusive = 4 // unknown verdicts, vacuous instances, budget exhausted
};

/// Runs the tool on argv-style arguments (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace absynth

#endif  // ABSYNTH_CLI_HPP
